#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sra/resdomain.hpp"

namespace sra {

// Goal-dependent analysis over the whole program: one memoized version per
// (predicate, canonical call pattern), seeded from the entry declarations,
// iterated over a worklist with dependency re-enqueueing until the solved
// forms stabilize.
struct AnalysisResult {
    Program prog;  // normalized
    TypeGrammar grammar;
    std::vector<ResourceDef> resources;
    AuxResults aux;
    std::vector<std::unique_ptr<AnalysisEntry>> versions;
    std::vector<size_t> roots;  // versions created from entry declarations
    std::vector<std::string> diags;
    bool ok = true;  // false: front-end or grammar errors (in diags)
};

// Renaming-invariant memo key: predicate, per-input-argument type symbols,
// and constant-pinned slot classes.
std::string canonical_call_pattern(const std::string& pred_key,
                                   const std::vector<std::string>& in_symbols,
                                   const std::vector<std::pair<size_t, Rat>>& consts);

AnalysisResult analyze(const Program& p);

const AnalysisEntry* find_version(const AnalysisResult& r, const std::string& version);

}  // namespace sra
