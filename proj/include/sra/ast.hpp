#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sra {

// First-order terms. Atoms are compounds of arity 0; lists are built from
// '[]' and the binary functor '.'.
struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    enum class Kind { Var, Int, Comp };
    Kind kind;
    std::string name;  // variable or functor name
    long long value = 0;
    std::vector<TermPtr> args;
};

TermPtr mk_var(const std::string& name);
TermPtr mk_int(long long v);
TermPtr mk_comp(const std::string& functor, std::vector<TermPtr> args = {});
TermPtr mk_atom(const std::string& name);
TermPtr mk_nil();
TermPtr mk_cons(TermPtr head, TermPtr tail);
TermPtr mk_list(const std::vector<TermPtr>& items);

bool is_nil(const TermPtr& t);
bool is_cons(const TermPtr& t);
bool is_atom(const TermPtr& t);
bool term_equal(const TermPtr& a, const TermPtr& b);
int term_compare(const TermPtr& a, const TermPtr& b);
std::string term_str(const TermPtr& t);
void collect_vars(const TermPtr& t, std::vector<std::string>& out);

// A body literal: a user predicate call or a builtin. Builtins are
// recognised by name/arity at analysis and execution time.
struct Literal {
    TermPtr atom;  // always Kind::Comp
    int line = 0, col = 0;
};

struct Clause {
    TermPtr head;  // Kind::Comp
    std::vector<Literal> body;
    int line = 0, col = 0;
    // Number of leading '=' literals introduced by normalization. These are
    // part of head selection: the interpreter charges clause entry only after
    // they succeed, and the analysis reads head patterns from them.
    int head_prefix = 0;
};

// Regular type definition: symbol := alt | alt | ...
// Alternatives are terms over type symbols ('num', 'nat', declared names)
// and constructors, e.g. [] and [num|listnum].
struct TypeDef {
    std::string name;
    std::vector<TermPtr> alts;
    int line = 0, col = 0;
};

enum class Mode { In, Out };

struct ModeArg {
    Mode mode;
    TermPtr type;  // type term: atom or compound such as list(num)
};

// entry/signature declaration: analysis root with per-argument types and
// modes. Every defined predicate carries one (or more, for multivariant
// call patterns).
struct EntryDecl {
    std::string pred;
    std::vector<ModeArg> args;
    int line = 0, col = 0;
};

// User-defined resource. headcost is charged on clause entry, litcost on
// each body literal, opcost per arithmetic operator evaluated in is/2 and
// comparisons.
struct ResourceDecl {
    std::string name;
    long long headcost = 1;
    long long litcost = 0;
    long long opcost_add = 0, opcost_sub = 0, opcost_mul = 0;
    bool agg_ub_sum = true;   // false: max
    bool agg_lb_min = true;   // false: sum
    long long default_lb = 0, default_ub = 0;
    int line = 0, col = 0;
};

struct TrustDecl {
    std::string pred;
    int arity = 0;
    bool not_fails = false;
    bool is_det = false;
    int line = 0, col = 0;
};

struct Program {
    std::string filename;
    std::vector<Clause> clauses;
    std::vector<TypeDef> types;
    std::vector<EntryDecl> entries;
    std::vector<ResourceDecl> resources;
    std::vector<TrustDecl> trusts;
};

std::string pred_key(const std::string& name, size_t arity);
std::string clause_str(const Clause& c);
std::string program_str(const Program& p);

}  // namespace sra
