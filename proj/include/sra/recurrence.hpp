#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sra/sizedtypes.hpp"
#include "sra/symexpr.hpp"

namespace sra {

// One guarded inequation of a bound function. `fn` identifies the function
// being bounded ("version|slot"); intermediate clause-local definitions use
// the variable name as fn and are eliminated by normalize().
struct Inequation {
    std::string fn;
    bool lower = false;  // true: fn >= rhs ; false: fn <= rhs
    SEP rhs;
    std::vector<DomCon> guard;
};

struct EqSystem {
    std::string fn;                   // solved function key ("version|slot")
    bool lower = false;
    std::vector<std::string> inputs;  // ordered input bound variables
    std::map<std::string, Rat> lows;  // known lower bounds (counts/nat >= 0)
    std::vector<Inequation> eqs;
};

// Guard-cased call-free bound expression.
struct ClosedForm {
    struct Case {
        std::vector<DomCon> guard;  // empty = always
        SEP expr;
    };
    std::vector<Case> cases;
    std::vector<std::string> inputs;  // formal argument order for instantiation
    bool exact = true;        // false: sound but possibly loose in its direction
    std::string pattern;      // which solver pattern produced it
    std::string note;
};

using SystemSet = std::map<std::string, EqSystem>;

// Eliminates intermediate definitions (equations whose fn is not the
// system's function) by substituting them in reverse topological order.
// Throws std::runtime_error on a definition cycle.
EqSystem normalize(const EqSystem& sys);

// Pattern solver. `scc` holds the systems of the same recursive group
// (including sys itself) for mutual recursion; `solved` holds closed forms
// of functions already solved, inlined before pattern matching. Fallback
// results are inf (upper) / 0 (lower) with exact=false.
ClosedForm solve_system(const EqSystem& sys, const SystemSet& scc,
                        const std::map<std::string, ClosedForm>& solved);
ClosedForm solve(const EqSystem& sys);

// Exact numeric fixpoint by iterating the (in)equations; calls into other
// systems of the set are unrolled recursively. Call-argument values clamp at
// zero (sizes are non-negative). nullopt: step budget exhausted or no
// applicable case.
std::optional<Val> unroll(const SystemSet& systems, const std::string& fn,
                          const std::map<std::string, Rat>& assignment,
                          long long max_steps = 1000000);

bool guard_satisfied(const std::vector<DomCon>& guard,
                     const std::map<std::string, Rat>& assignment);

std::optional<Val> evaluate(const ClosedForm& cf,
                            const std::map<std::string, Rat>& assignment);

// Instantiates a closed form at actual argument expressions; an undecidable
// case guard falls back to min (lower) / max (upper) across the candidates.
SEP closed_form_apply(const ClosedForm& cf, const std::vector<std::string>& inputs,
                      const std::vector<SEP>& args, bool lower);

// Dominant-term complexity order: constants and lower-order terms dropped,
// coefficients stripped, min/max preserved, exponentials kept with their
// base. Returns se_inf for unbounded forms.
SEP order_of(const SEP& bound, const std::map<std::string, Rat>& lows);
SEP order_of_form(const ClosedForm& cf, const std::map<std::string, Rat>& lows);

std::string closed_form_str(const ClosedForm& cf);
std::string eqsystem_str(const EqSystem& sys);

}  // namespace sra
