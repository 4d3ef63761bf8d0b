#pragma once

#include <map>
#include <string>
#include <vector>

#include "sra/frontend.hpp"
#include "sra/regtypes.hpp"

namespace sra {

enum class NF { Fails, NotFails };     // fails is the safe default
enum class Det { NonDet, IsDet };      // non_det is the safe default

struct AuxInfo {
    NF nf = NF::Fails;
    Det det = Det::NonDet;
    bool exclusive = false;     // clauses pairwise exclusive on some input arg
    bool excl_leading = false;  // exclusivity decided before anything is charged
};

// Results keyed by "name/arity".
struct AuxResults {
    std::map<std::string, AuxInfo> preds;
    AuxInfo get(const std::string& key) const {
        auto it = preds.find(key);
        return it == preds.end() ? AuxInfo{} : it->second;
    }
};

// Strongly connected components of the defined-predicate call graph in
// reverse topological order (callees before callers).
std::vector<std::vector<std::string>> call_sccs(const Program& p);

// Pairwise clause exclusivity on some single input argument: disjoint top
// constructors, distinct integer constants, or disjoint single-variable
// linear guard regions. The grammar is mutable because entry types may
// materialize list(T) symbols on demand.
bool clauses_mutually_exclusive(const Program& p, TypeGrammar& g,
                                const std::string& pred_key);

// Full bottom-up analysis with trust overrides.
AuxResults analyze_aux(const Program& p, TypeGrammar& g,
                       std::vector<std::string>& diags);

}  // namespace sra
