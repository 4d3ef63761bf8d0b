#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sra/regtypes.hpp"
#include "sra/symexpr.hpp"

namespace sra {

// Sized-type schema: the regular type annotated with bound slots. Rec nodes
// count type-rule applications along their position (list length); Num nodes
// carry value intervals; Plain nodes are non-recursive symbols without
// bounds. A missing slot means no bound in that direction.
struct Schema;
using SchemaPtr = std::shared_ptr<const Schema>;

struct Schema {
    enum class K { Rec, Num, Plain };
    struct Child {
        std::string functor;  // position <f,n> within the alternatives
        int index = 0;        // 1-based
        SchemaPtr sub;
    };
    K k = K::Num;
    std::string symbol;
    std::optional<SEP> lo, hi;
    // Built from an empty collection (no witnesses at this position): joins
    // as an identity instead of forcing no-bound.
    bool vacuous = false;
    std::vector<Child> children;
};

struct FreshVars {
    int n = 0;
    std::string prefix = "v";
    std::string next() { return prefix + std::to_string(n++); }
};

// Schema with fresh bound variables at every Rec/Num node.
SchemaPtr sized_schema(const std::string& symbol, const TypeGrammar& g, FreshVars& fv);
// Same shape with every slot absent.
SchemaPtr schema_nob(const std::string& symbol, const TypeGrammar& g);

struct SizeConstraint {
    std::string var;
    bool lower;  // true: var >= expr ; false: var <= expr
    SEP expr;
};
// Pointwise expansion of a ≶ b: a's variable slots constrained by b's
// expressions. Slots missing on b's side emit nothing.
std::vector<SizeConstraint> relate(const SchemaPtr& a, const SchemaPtr& b);

// Case constraint over one bound variable (α=0, α>0, γ=k, ...).
struct DomCon {
    std::string var;
    enum class Rel { Eq, Gt, Ge } rel = Rel::Eq;
    Rat k;
};
std::string domcon_str(const DomCon& d);

struct PatternResult {
    bool ok = true;
    std::string error;
    std::vector<DomCon> dom;  // top-level and recursion-spine constraints
    std::vector<std::pair<std::string, SchemaPtr>> binds;
    // The pattern restricts the call domain beyond what `dom` expresses
    // (non-spine constants, constant-only alternatives, repeated variables):
    // a match is then not guaranteed by the emitted constraints alone.
    bool uncaptured = false;
};
// Matches a head-argument pattern against the argument's schema: top-level
// constructors and nested recursion-spine selections yield case constraints;
// pattern variables at any depth are bound to their sub-schemas (recursive
// tails get decremented bounds).
PatternResult head_pattern_constraints(const TermPtr& pattern, const SchemaPtr& schema,
                                       const TypeGrammar& g);

// Concrete sizes of a ground member: constant slots, vacuous where empty.
SchemaPtr size_of_term(const TermPtr& t, const std::string& symbol,
                       const TypeGrammar& g);

// Sized schema of a constructed term: variables take their schemas from env
// (unknown variables contribute no bounds), constants are exact.
SchemaPtr compose_size(const TermPtr& t, const std::string& symbol,
                       const TypeGrammar& g,
                       const std::map<std::string, SchemaPtr>& env);

// Slot listing in canonical (pre-order) order; one entry per Rec/Num node.
struct SlotInfo {
    bool is_num = false;
    bool is_nat = false;
    int depth = 0;  // number of Rec ancestors (the node itself included for Rec)
    std::optional<SEP> lo, hi;
};
void schema_slots(const SchemaPtr& s, std::vector<SlotInfo>& out);

// Binds a's variable slots to b's expressions (pairs of same-shape schemas);
// slots missing on b stay unbound.
void bind_schema_vars(const SchemaPtr& a, const SchemaPtr& b,
                      std::map<std::string, SEP>& env);

SchemaPtr schema_map(const SchemaPtr& s,
                     const std::function<std::optional<SEP>(const SEP&, bool lower)>& f);
SchemaPtr schema_subst(const SchemaPtr& s, const std::map<std::string, SEP>& env);
SchemaPtr schema_join(const SchemaPtr& a, const SchemaPtr& b);
bool schema_equal(const SchemaPtr& a, const SchemaPtr& b);
std::string schema_str(const SchemaPtr& s);

}  // namespace sra
