#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sra/ast.hpp"

namespace sra {

// Regular term grammar: each type symbol maps to deterministic alternatives.
// An alternative is a type term: an integer constant, a constructor atom, a
// reference to a base type (num, nat) or another symbol, or a compound whose
// arguments are type terms.
struct TypeGrammar {
    std::map<std::string, std::vector<TermPtr>> rules;

    static bool is_base(const std::string& s) { return s == "num" || s == "nat"; }
    bool declared(const std::string& s) const { return rules.count(s) > 0; }
    bool defined(const std::string& s) const { return is_base(s) || declared(s); }
};

// How an atom leaf inside a type term reads against a grammar.
enum class LeafKind { Base, Symbol, Constructor };
LeafKind leaf_kind(const std::string& name, const TypeGrammar& g);

// Builds the grammar from regtype directives and materializes list(T) sugar
// appearing in entry declarations. Problems are appended to errors.
TypeGrammar build_grammar(const Program& p, std::vector<std::string>& errors);

// Resolves a declaration type term to a grammar symbol, creating list(T)
// rules on demand.
std::string type_symbol_for(const TermPtr& type_term, TypeGrammar& g,
                            std::vector<std::string>& errors);

// Checks: referenced symbols defined, deterministic alternatives, every
// symbol productive (generates a finite term), no mutual recursion, no
// self-alias alternatives.
bool well_formed(const TypeGrammar& g, std::vector<std::string>& errors);

// Ground-term membership. Non-ground terms are rejected (false).
bool membership(const TermPtr& t, const std::string& symbol, const TypeGrammar& g);
bool member_of_type_term(const TermPtr& t, const TermPtr& tt, const TypeGrammar& g);

// True if the alternative's expansion mentions the symbol itself.
bool alt_is_recursive(const TermPtr& alt, const std::string& symbol);
bool is_recursive_symbol(const std::string& symbol, const TypeGrammar& g);

// The alternative of `symbol` whose top shape matches t, or nullptr.
const TermPtr* matching_alt(const TermPtr& t, const std::string& symbol,
                            const TypeGrammar& g);

}  // namespace sra
