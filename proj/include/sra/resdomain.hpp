#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sra/auxdomains.hpp"
#include "sra/recurrence.hpp"
#include "sra/sizedtypes.hpp"

namespace sra {

// Runtime form of a resource declaration.
struct ResourceDef {
    std::string name;
    Rat headcost{1};            // charged on clause entry (head + prefix match)
    Rat litcost{0};             // charged per user-predicate body literal
    Rat op_add{0}, op_sub{0}, op_mul{0};  // charged per operator evaluation
    bool agg_ub_sum = true;     // upper aggregation: sum (max when exclusive)
    bool agg_lb_min = true;     // lower aggregation: min (sum otherwise)
    Rat def_lo{0}, def_hi{0};   // default bounds for unknown predicates
};

ResourceDef resource_from_decl(const ResourceDecl& d);
// The programs' resources; an implicit `steps` when none is declared.
std::vector<ResourceDef> program_resources(const Program& p);

// One guarded relation: var <= expr (upper) or var >= expr (lower).
struct Reln {
    std::string var;
    bool lower = false;
    SEP expr;
    std::vector<DomCon> guard;  // empty: unconditional within the element's d
};

// Abstract element of the resources domain.
struct AbstractElement {
    std::string version;
    bool bottom = false;
    std::string s_lo, s_hi;  // solution-count bound variables
    std::map<std::string, std::pair<std::string, std::string>> res;  // name -> (lo,hi)
    bool failed = true;  // true: lower bounds freeze from here on
    std::vector<DomCon> d;
    std::vector<Reln> rels;
    NF nf = NF::Fails;
    Det det = Det::NonDet;
    std::map<std::string, SchemaPtr> env;  // goal variable -> sized schema
};

// Fresh-variable supply shared across one analysis.
struct Fresh {
    long long n = 0;
    std::string next(const std::string& stem) { return stem + std::to_string(n++); }
};

// Formal input slot metadata (report naming and admissibility).
struct FormalMeta {
    std::string var;
    size_t arg = 0;    // input argument index (over the entry's input args)
    size_t slot = 0;   // pre-order slot index within the argument schema
    bool lower = false;
    bool is_num = false;   // numeric value slot (else a count slot)
    bool is_nat = false;
    size_t depth = 1;      // nesting depth of the slot
};

// Memoized analysis result of one (predicate, call pattern) version.
struct AnalysisEntry {
    std::string version;   // "pred/arity#N"
    std::string pred_key;
    std::vector<size_t> input_args, output_args;   // positions in the head
    std::vector<SchemaPtr> call_schemas;           // formal input schemas
    std::vector<std::string> out_symbols;          // grammar symbol per output arg
    std::vector<DomCon> call_d;
    std::vector<std::string> inputs;               // formal slot order
    std::vector<FormalMeta> meta;                  // parallel to inputs
    std::map<std::string, Rat> lows;
    std::map<std::string, EqSystem> raw;           // slot key -> equations
    std::map<std::string, ClosedForm> forms;       // slot key -> closed form
    AbstractElement success;
    bool stable = false;
};

// Slot keys used in raw/forms: "sL", "sU", "r:<res>:L", "r:<res>:U",
// "o<arg>:<slot>:L", "o<arg>:<slot>:U".
std::string slot_sol(bool lower);
std::string slot_res(const std::string& res, bool lower);
std::string slot_out(size_t arg, size_t slot, bool lower);

// ---------------------------------------------------------------------------
// Lattice operations

AbstractElement bottom(const std::vector<ResourceDef>& defs, Fresh& fresh);
bool leq(const AbstractElement& a, const AbstractElement& b);
AbstractElement lub(const AbstractElement& a, const AbstractElement& b, Fresh& fresh);

// ---------------------------------------------------------------------------
// Clause-level transfer functions

// The per-clause analysis state built by call_to_entry and threaded through
// extend calls.
struct ClauseState {
    AbstractElement elem;
    TermPtr head;
    std::map<std::string, TermPtr> defs;  // pending constructions (var := term)
    std::map<std::string, std::string> out_symbol;  // output head var -> symbol
    bool applicable = true;  // false: head pattern contradicts the call types
    std::string error;
    // Still inside the atomic clause-selection section: only the head match
    // and comparison guards have run, nothing has been charged irrevocably.
    bool leading = true;
    // Head patterns restrict the call domain beyond the emitted d constraints;
    // clause entry is then not certain anywhere in the case domain.
    bool uncaptured = false;
};

// Begin analysis of one normalized clause under the version's call pattern.
// Consumes the head-prefix pattern literals (they produce d constraints and
// schema bindings, and are not charged as body literals).
ClauseState call_to_entry(const AnalysisEntry& ver, const Clause& clause,
                          const std::vector<ResourceDef>& defs, const TypeGrammar& g,
                          Fresh& fresh);

// Abstract success of one body literal, from the callee's memoized entry.
// Used by extend for user-predicate literals.
struct LiteralSuccess {
    const AnalysisEntry* callee = nullptr;  // null: unknown predicate (bottom)
    bool same_scc = false;                  // keep the callee symbolic
    NF nf = NF::Fails;
    Det det = Det::NonDet;
};

// Extends the state over one body literal (builtin or user call).
// freeze_on_compare: the enclosing predicate is not proven non-failing, so a
// comparison is a genuine failure point and freezes the lower bounds. While
// the clause is still in its leading guard run, such a failure precedes every
// charge, so the lower bounds are zeroed rather than frozen.
void extend(ClauseState& st, const Literal& lit, const LiteralSuccess& succ,
            const std::vector<ResourceDef>& defs, const TypeGrammar& g, Fresh& fresh,
            bool freeze_on_compare);

// Zeroes the clause's lower bounds (solutions and every resource) and freezes
// them: the clause can be left before anything is charged.
void zero_lower_bounds(ClauseState& st, const std::vector<ResourceDef>& defs,
                       Fresh& fresh);

// Final per-clause bounds over the version's formal slot variables only.
struct ClausePrime {
    bool applicable = true;
    std::string error;
    std::vector<DomCon> d;
    SEP s_lo, s_hi;
    std::map<std::string, std::pair<SEP, SEP>> res;       // resource -> (lo,hi)
    std::vector<SchemaPtr> outs;                          // per output arg
    bool failed = false;
};

ClausePrime exit_to_prime(const ClauseState& st, const AnalysisEntry& ver,
                          const std::vector<ResourceDef>& defs, const TypeGrammar& g);

// ---------------------------------------------------------------------------
// Widening: aggregate clause primes, build equation systems, solve, refine.

struct WidenInput {
    std::vector<ClausePrime> primes;
    bool exclusive = false;     // clauses proven mutually exclusive
    // Exclusivity established by head patterns and leading guards alone: a
    // rejected clause then charges nothing, so upper resource bounds may take
    // the maximum instead of the sum.
    bool excl_leading = false;
    NF nf = NF::Fails;
    Det det = Det::NonDet;
};

// scc_raw: raw systems of all versions in the same recursion group (slot key
// qualified by version: "version|slot"); solved: closed forms of everything
// already solved outside the group. Fills ver.raw, ver.forms, ver.success.
void widen(AnalysisEntry& ver, const WidenInput& in, const std::vector<ResourceDef>& defs,
           const std::map<std::string, EqSystem>& scc_raw,
           const std::map<std::string, ClosedForm>& solved, Fresh& fresh,
           std::vector<std::string>& diags);

// ---------------------------------------------------------------------------
// Helpers shared with the fixpoint engine and tests

// Formal schemas + metadata for an entry's input argument symbols.
void build_formals(AnalysisEntry& ver, const std::vector<std::string>& in_symbols,
                   const TypeGrammar& g);

// Pre-order slot expressions of a schema (lower=odd positions mirror meta).
std::vector<std::optional<SEP>> schema_slot_exprs(const SchemaPtr& s);

// Rebuilds a schema of `shape` carrying the given pre-order slot expressions.
SchemaPtr schema_from_exprs(const SchemaPtr& shape,
                            const std::vector<std::optional<SEP>>& exprs);

std::string element_str(const AbstractElement& e);

}  // namespace sra
