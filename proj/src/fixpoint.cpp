#include "sra/fixpoint.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "sra/frontend.hpp"

namespace sra {

std::string canonical_call_pattern(const std::string& pred_key,
                                   const std::vector<std::string>& in_symbols,
                                   const std::vector<std::pair<size_t, Rat>>& consts) {
    std::string key = pred_key;
    for (const auto& s : in_symbols) key += "|" + s;
    auto cs = consts;
    std::sort(cs.begin(), cs.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    for (const auto& [slot, v] : cs)
        key += "|#" + std::to_string(slot) + "=" + v.str();
    return key;
}

namespace {

struct Engine {
    AnalysisResult res;
    std::map<std::string, std::vector<const Clause*>> clauses;
    std::map<std::string, const EntryDecl*> entry_of;
    std::map<std::string, int> scc_of;
    std::map<std::string, size_t> memo;         // canonical pattern -> version index
    std::map<std::string, int> version_count;   // pred -> versions created
    std::vector<std::set<size_t>> dependents;
    std::vector<int> iterations;
    std::vector<std::string> prev_sig;
    std::deque<size_t> queue;
    std::vector<bool> queued;
    std::set<std::string> reported;
    Fresh fresh;

    void diag(const std::string& m) { res.diags.push_back(m); }

    void note_once(const std::string& m) {
        if (reported.insert(m).second) diag(m);
    }

    size_t get_version(const std::string& pkey, const std::vector<std::string>& in_syms,
                       const std::vector<std::pair<size_t, Rat>>& consts) {
        std::string key = canonical_call_pattern(pkey, in_syms, consts);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        const EntryDecl* ed = entry_of.at(pkey);
        auto ver = std::make_unique<AnalysisEntry>();
        ver->pred_key = pkey;
        ver->version = pkey + "#" + std::to_string(++version_count[pkey]);
        std::vector<std::string> errs;
        for (size_t i = 0; i < ed->args.size(); ++i) {
            if (ed->args[i].mode == Mode::In) {
                ver->input_args.push_back(i);
            } else {
                ver->output_args.push_back(i);
                ver->out_symbols.push_back(
                    type_symbol_for(ed->args[i].type, res.grammar, errs));
            }
        }
        for (const auto& e : errs) diag(e);
        build_formals(*ver, in_syms, res.grammar);
        for (const auto& [slot, v] : consts) {
            if (slot < ver->inputs.size())
                ver->call_d.push_back({ver->inputs[slot], DomCon::Rel::Eq, v});
        }
        size_t idx = res.versions.size();
        res.versions.push_back(std::move(ver));
        memo[key] = idx;
        dependents.emplace_back();
        iterations.push_back(0);
        prev_sig.emplace_back();
        queued.push_back(false);
        enqueue(idx);
        return idx;
    }

    void enqueue(size_t i) {
        if (queued[i]) return;
        queued[i] = true;
        queue.push_back(i);
    }

    std::vector<std::string> in_symbols_for(const EntryDecl& ed) {
        std::vector<std::string> syms;
        std::vector<std::string> errs;
        for (const auto& a : ed.args)
            if (a.mode == Mode::In)
                syms.push_back(type_symbol_for(a.type, res.grammar, errs));
        for (const auto& e : errs) diag(e);
        return syms;
    }

    // Signature of the solved state, used for change detection.
    std::string signature(const AnalysisEntry& v) {
        std::string s;
        for (const auto& [slot, sys] : v.raw) s += slot + "=" + eqsystem_str(sys) + ";";
        s += "//";
        for (const auto& [slot, cf] : v.forms) s += slot + "=" + closed_form_str(cf) + ";";
        return s;
    }

    void fallback_forms(AnalysisEntry& v) {
        v.forms.clear();
        auto put = [&](const std::string& slot, bool lower) {
            ClosedForm cf;
            cf.cases.push_back({{}, lower ? se_int(0) : se_inf()});
            cf.inputs = v.inputs;
            cf.exact = false;
            cf.pattern = "cap";
            cf.note = "iteration cap reached";
            v.forms[slot] = cf;
        };
        put(slot_sol(true), true);
        put(slot_sol(false), false);
        for (const auto& rd : res.resources) {
            put(slot_res(rd.name, true), true);
            put(slot_res(rd.name, false), false);
        }
    }

    void analyze_version(size_t i) {
        AnalysisEntry& ver = *res.versions[i];
        if (++iterations[i] > 50) {
            diag("iteration cap reached for " + ver.version + "; using default bounds");
            fallback_forms(ver);
            ver.stable = true;
            return;
        }

        const AuxInfo ai = res.aux.get(ver.pred_key);
        bool freeze = ai.nf == NF::Fails;
        WidenInput in;
        in.nf = ai.nf;
        in.det = ai.det;
        in.exclusive = ai.exclusive;
        in.excl_leading = ai.excl_leading;

        for (const Clause* c : clauses[ver.pred_key]) {
            ClauseState st = call_to_entry(ver, *c, res.resources, res.grammar, fresh);
            // Selection may reject on a restriction the domain cannot express;
            // nothing is charged before selection commits.
            if (freeze && st.uncaptured) zero_lower_bounds(st, res.resources, fresh);
            for (size_t li = (size_t)c->head_prefix; li < c->body.size() && st.applicable;
                 ++li) {
                const auto& atom = c->body[li].atom;
                LiteralSuccess succ;
                if (!is_builtin(atom->name, atom->args.size())) {
                    std::string callee = pred_key(atom->name, atom->args.size());
                    auto eit = entry_of.find(callee);
                    if (eit == entry_of.end() || !clauses.count(callee)) {
                        note_once("undefined predicate " + callee + " called from " +
                                  ver.pred_key + "; bound to bottom");
                    } else {
                        const EntryDecl& ed = *eit->second;
                        std::vector<std::string> in_syms = in_symbols_for(ed);
                        // actual input slot expressions decide constant classes
                        std::vector<std::pair<size_t, Rat>> consts;
                        size_t slot_base = 0, sym_i = 0;
                        for (size_t p = 0; p < ed.args.size(); ++p) {
                            if (ed.args[p].mode != Mode::In) continue;
                            SchemaPtr as;
                            if (p < atom->args.size())
                                as = compose_size(atom->args[p], in_syms[sym_i],
                                                  res.grammar, st.elem.env);
                            auto exprs = schema_slot_exprs(as);
                            for (size_t k = 0; k < exprs.size(); ++k) {
                                if (exprs[k]) {
                                    auto cv = se_as_const(se_canon(*exprs[k]));
                                    if (cv) consts.push_back({slot_base + k, *cv});
                                }
                            }
                            slot_base += exprs.size();
                            ++sym_i;
                        }
                        size_t cv = get_version(callee, in_syms, consts);
                        dependents[cv].insert(i);
                        succ.callee = res.versions[cv].get();
                        succ.same_scc =
                            scc_of.count(callee) && scc_of.count(ver.pred_key) &&
                            scc_of[callee] == scc_of[ver.pred_key];
                        AuxInfo cal_ai = res.aux.get(callee);
                        succ.nf = cal_ai.nf;
                        succ.det = cal_ai.det;
                    }
                }
                extend(st, c->body[li], succ, res.resources, res.grammar, fresh, freeze);
            }
            in.primes.push_back(exit_to_prime(st, ver, res.resources, res.grammar));
        }

        // Raw systems of the same recursion group; solved forms of the rest.
        SystemSet scc_raw;
        std::map<std::string, ClosedForm> solved;
        int my_scc = scc_of.count(ver.pred_key) ? scc_of[ver.pred_key] : -1;
        for (size_t j = 0; j < res.versions.size(); ++j) {
            if (j == i) continue;
            const AnalysisEntry& other = *res.versions[j];
            int oscc = scc_of.count(other.pred_key) ? scc_of[other.pred_key] : -2;
            if (oscc == my_scc) {
                for (const auto& [slot, sys] : other.raw)
                    scc_raw[other.version + "|" + slot] = sys;
            } else {
                for (const auto& [slot, cf] : other.forms)
                    solved[other.version + "|" + slot] = cf;
            }
        }

        widen(ver, in, res.resources, scc_raw, solved, fresh, res.diags);

        std::string sig = signature(ver);
        if (sig != prev_sig[i]) {
            prev_sig[i] = sig;
            ver.stable = false;
            for (size_t dep : dependents[i]) enqueue(dep);
            enqueue(i);
        } else {
            ver.stable = true;
        }
    }

    void run(const Program& input) {
        res.prog = normalize_program(input);
        std::vector<std::string> errs;
        res.grammar = build_grammar(res.prog, errs);
        well_formed(res.grammar, errs);
        if (!errs.empty()) {
            for (const auto& e : errs) diag(e);
            res.ok = false;
            return;
        }
        res.resources = program_resources(res.prog);
        res.aux = analyze_aux(res.prog, res.grammar, res.diags);

        for (const auto& c : res.prog.clauses)
            clauses[pred_key(c.head->name, c.head->args.size())].push_back(&c);
        for (const auto& e : res.prog.entries) {
            std::string k = pred_key(e.pred, e.args.size());
            entry_of.emplace(k, &e);
        }
        auto sccs = call_sccs(res.prog);
        for (size_t s = 0; s < sccs.size(); ++s)
            for (const auto& p : sccs[s]) scc_of[p] = (int)s;

        for (const auto& e : res.prog.entries) {
            std::string k = pred_key(e.pred, e.args.size());
            if (entry_of.at(k) != &e) continue;  // one root per declaration set
            size_t idx = get_version(k, in_symbols_for(e), {});
            res.roots.push_back(idx);
        }

        while (!queue.empty()) {
            size_t i = queue.front();
            queue.pop_front();
            queued[i] = false;
            analyze_version(i);
        }
    }
};

}  // namespace

AnalysisResult analyze(const Program& p) {
    Engine eng;
    eng.run(p);
    return std::move(eng.res);
}

const AnalysisEntry* find_version(const AnalysisResult& r, const std::string& version) {
    for (const auto& v : r.versions)
        if (v->version == version) return v.get();
    return nullptr;
}

}  // namespace sra
