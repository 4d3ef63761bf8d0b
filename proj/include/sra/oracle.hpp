#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sra/ast.hpp"
#include "sra/fixpoint.hpp"
#include "sra/regtypes.hpp"
#include "sra/resdomain.hpp"

namespace sra {

// Exhaustive depth-first resolution over a cut-free program: exact solution
// counts and exact per-resource totals for one ground-input goal.

struct OracleLimits {
    long long max_steps = 1000000;  // clause tries + builtin evaluations
    int max_depth = 20000;          // resolution chain length
};

struct ConcreteMeasure {
    long long solutions = 0;
    std::map<std::string, Rat> totals;  // resource name -> accumulated cost
    bool valid = true;                  // false: a limit was hit
    std::string divergence;             // reason when invalid
};

// Costs accrue atomically: a clause charges its head cost (plus the operator
// costs of its leading comparison run) only once the head unification, the
// destructuring prefix, and that entire leading run have succeeded; a clause
// rejected inside that section charges nothing.  Literal costs accrue each
// time a user literal is called; operator costs each time an is/2 or a
// later comparison is evaluated.  No occurs check.
ConcreteMeasure run_goal(const Program& p, const TermPtr& goal,
                         const std::vector<ResourceDef>& defs,
                         const OracleLimits& lim = {});

// Random ground member of `symbol` whose measured sizes (recursive depth,
// numeric value) do not exceed `budget`.  Returns nullptr only when the type
// has no member within the budget.
TermPtr random_member(const std::string& symbol, const TypeGrammar& g,
                      long long budget, std::mt19937_64& rng);

// Deterministic stream: `count` members seeded by `seed`.
std::vector<TermPtr> generate_inputs(const std::string& symbol,
                                     const TypeGrammar& g, long long budget,
                                     std::uint64_t seed, std::size_t count);

// Assignment of an analysis version's formal size variables to the concrete
// sizes of the given ground input terms (both bound sides get the measured
// value; empty-collection slots are left unassigned).
std::map<std::string, Rat> measured_sizes(const AnalysisEntry& v,
                                          const std::vector<TermPtr>& inputs,
                                          const TypeGrammar& g);

struct Verdict {
    bool pass = true;
    std::vector<std::string> violations;
};

// Pass iff lower form <= observed <= upper form for the solution count and
// every resource, evaluated at the measured sizes.  Forms that do not apply
// (unassigned slot, no claim) are skipped; an infinite lower bound is a
// violation in itself.  `only` restricts checking to "solutions" or one
// resource name; empty checks everything.
Verdict check_bounds(const ConcreteMeasure& m, const AnalysisEntry& v,
                     const std::map<std::string, Rat>& sizes,
                     const std::string& only = "");

}  // namespace sra
