#include "sra/recurrence.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sra {

namespace {

using Kind = SymExpr::Kind;

std::string call_key(const SymExpr& c) { return c.name + "|" + c.slot; }

bool domcon_equal(const DomCon& a, const DomCon& b) {
    return a.var == b.var && a.rel == b.rel && a.k == b.k;
}

std::string guard_str(const std::vector<DomCon>& g) {
    std::string out;
    for (size_t i = 0; i < g.size(); ++i) {
        if (i) out += ",";
        out += domcon_str(g[i]);
    }
    return out;
}

}  // namespace

bool guard_satisfied(const std::vector<DomCon>& guard,
                     const std::map<std::string, Rat>& assignment) {
    for (const auto& d : guard) {
        auto it = assignment.find(d.var);
        if (it == assignment.end()) return false;
        const Rat& v = it->second;
        switch (d.rel) {
            case DomCon::Rel::Eq:
                if (!(v == d.k)) return false;
                break;
            case DomCon::Rel::Gt:
                if (!(d.k < v)) return false;
                break;
            case DomCon::Rel::Ge:
                if (v < d.k) return false;
                break;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// normalize: eliminate intermediate definitions

EqSystem normalize(const EqSystem& sys) {
    std::map<std::string, SEP> defs;
    std::vector<Inequation> mains;
    for (const auto& eq : sys.eqs) {
        if (eq.fn == sys.fn)
            mains.push_back(eq);
        else
            defs[eq.fn] = eq.rhs;  // intermediate variable definition
    }
    if (defs.empty()) return sys;

    // Reverse topological order over the definition dependency graph.
    std::vector<std::string> order;
    std::set<std::string> done, visiting;
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
        if (done.count(v)) return;
        if (!visiting.insert(v).second)
            throw std::runtime_error("cycle among intermediate definitions at '" + v + "'");
        std::set<std::string> vars;
        se_vars(defs[v], vars);
        for (const auto& w : vars)
            if (defs.count(w)) visit(w);
        visiting.erase(v);
        done.insert(v);
        order.push_back(v);
    };
    for (const auto& [v, e] : defs) visit(v);

    std::map<std::string, SEP> resolved;
    for (const auto& v : order) resolved[v] = se_subst(defs[v], resolved);

    EqSystem out = sys;
    out.eqs.clear();
    for (auto& eq : mains) {
        eq.rhs = se_canon(se_subst(eq.rhs, resolved));
        out.eqs.push_back(std::move(eq));
    }
    return out;
}

// ---------------------------------------------------------------------------
// unroll

std::optional<Val> unroll(const SystemSet& systems, const std::string& fn,
                          const std::map<std::string, Rat>& assignment,
                          long long max_steps) {
    long long budget = max_steps;
    std::function<std::optional<Val>(const std::string&, const std::map<std::string, Rat>&)>
        go = [&](const std::string& key,
                 const std::map<std::string, Rat>& asg) -> std::optional<Val> {
        if (--budget < 0) return std::nullopt;
        auto sit = systems.find(key);
        if (sit == systems.end()) return std::nullopt;
        const EqSystem& sys = sit->second;
        CallEval ce = [&](const SymExpr& c,
                          const std::vector<Val>& args) -> std::optional<Val> {
            std::string ck = call_key(c);
            auto cit = systems.find(ck);
            if (cit == systems.end()) return std::nullopt;
            const EqSystem& callee = cit->second;
            if (args.size() != callee.inputs.size()) return std::nullopt;
            std::map<std::string, Rat> sub;
            for (size_t i = 0; i < args.size(); ++i) {
                if (args[i].inf) return std::nullopt;
                Rat v = args[i].q;
                if (v < Rat(0)) v = Rat(0);  // sizes clamp at zero
                sub[callee.inputs[i]] = v;
            }
            return go(ck, sub);
        };
        std::optional<Val> acc;
        for (const auto& eq : sys.eqs) {
            if (!guard_satisfied(eq.guard, asg)) continue;
            auto v = se_eval(eq.rhs, asg, ce);
            if (!v) return std::nullopt;
            if (!acc)
                acc = *v;
            else if (sys.lower)
                acc = val_le(*v, *acc) ? *v : *acc;
            else
                acc = val_le(*acc, *v) ? *v : *acc;
        }
        return acc;
    };
    return go(fn, assignment);
}

// ---------------------------------------------------------------------------
// evaluate / apply

std::optional<Val> evaluate(const ClosedForm& cf,
                            const std::map<std::string, Rat>& assignment) {
    for (const auto& c : cf.cases) {
        if (!guard_satisfied(c.guard, assignment)) continue;
        return se_eval(c.expr, assignment, nullptr);
    }
    return std::nullopt;
}

namespace {

enum class Tri { True, False, Unknown };

Tri decide_domcon(const DomCon& d, const SEP& arg) {
    auto c = se_as_const(arg);
    if (!c) return Tri::Unknown;
    switch (d.rel) {
        case DomCon::Rel::Eq:
            return *c == d.k ? Tri::True : Tri::False;
        case DomCon::Rel::Gt:
            return d.k < *c ? Tri::True : Tri::False;
        case DomCon::Rel::Ge:
            return (*c < d.k) ? Tri::False : Tri::True;
    }
    return Tri::Unknown;
}

}  // namespace

SEP closed_form_apply(const ClosedForm& cf, const std::vector<std::string>& inputs,
                      const std::vector<SEP>& args, bool lower) {
    std::map<std::string, SEP> env;
    for (size_t i = 0; i < inputs.size() && i < args.size(); ++i) env[inputs[i]] = args[i];
    std::vector<SEP> candidates;
    bool unknown_seen = false;
    for (const auto& c : cf.cases) {
        Tri all = Tri::True;
        for (const auto& d : c.guard) {
            auto it = env.find(d.var);
            Tri t = it == env.end() ? Tri::Unknown : decide_domcon(d, se_canon(it->second));
            if (t == Tri::False) {
                all = Tri::False;
                break;
            }
            if (t == Tri::Unknown) all = Tri::Unknown;
        }
        if (all == Tri::False) continue;
        candidates.push_back(se_subst(c.expr, env));
        if (all == Tri::True && !unknown_seen) break;  // later cases unreachable
        unknown_seen = true;
    }
    if (candidates.empty()) return lower ? se_int(0) : se_inf();
    if (candidates.size() == 1) return candidates[0];
    return lower ? se_min(std::move(candidates)) : se_max(std::move(candidates));
}

// ---------------------------------------------------------------------------
// solver

namespace {

bool contains_scc_call(const SEP& e, const std::set<std::string>& keys) {
    if (e->kind == Kind::Call && keys.count(call_key(*e))) return true;
    for (const auto& k : e->kids)
        if (contains_scc_call(k, keys)) return true;
    return false;
}

struct CallPart {
    Rat coef{1};
    SEP call;  // Kind::Call
};

struct Decomp {
    bool ok = true;
    std::vector<SEP> base_terms;
    std::vector<CallPart> calls;
    SEP base() const { return se_add(base_terms); }
};

Decomp decompose(const SEP& rhs, const std::set<std::string>& keys) {
    Decomp d;
    SEP c = se_canon(rhs);
    std::vector<SEP> terms;
    if (c->kind == Kind::Add)
        terms = c->kids;
    else
        terms = {c};
    for (const auto& t : terms) {
        std::vector<SEP> factors;
        if (t->kind == Kind::Mul)
            factors = t->kids;
        else
            factors = {t};
        Rat coef(1);
        std::vector<SEP> callfs, others;
        for (const auto& f : factors) {
            if (auto k = se_as_const(f)) {
                coef = coef * *k;
            } else if (f->kind == Kind::Call && keys.count(call_key(*f))) {
                callfs.push_back(f);
            } else {
                if (contains_scc_call(f, keys)) {
                    d.ok = false;
                    return d;
                }
                others.push_back(f);
            }
        }
        if (callfs.empty()) {
            d.base_terms.push_back(t);
            continue;
        }
        if (callfs.size() > 1 || !others.empty()) {
            d.ok = false;
            return d;
        }
        d.calls.push_back(CallPart{coef, callfs[0]});
    }
    return d;
}

// Argument shape of a recursive call relative to the system inputs.
struct ArgShape {
    bool ok = true;
    // slot -> decrement (absent: invariant)
    std::map<size_t, Rat> decs;
};

ArgShape arg_shape(const SymExpr& call, const std::vector<std::string>& inputs) {
    ArgShape s;
    if (call.kids.size() != inputs.size()) {
        s.ok = false;
        return s;
    }
    for (size_t j = 0; j < inputs.size(); ++j) {
        SEP a = se_canon(call.kids[j]);
        if (a->kind == Kind::Var && a->name == inputs[j]) continue;
        // Expect inputs[j] - k with k > 0.
        SEP diff = se_canon(se_sub(se_var(inputs[j]), a));
        auto k = se_as_const(diff);
        if (k && Rat(0) < *k) {
            s.decs[j] = *k;
            continue;
        }
        s.ok = false;
        return s;
    }
    return s;
}

struct Solver {
    const EqSystem& sys0;
    const SystemSet& scc;
    const std::map<std::string, ClosedForm>& solved;

    EqSystem sys;
    std::set<std::string> keys;           // same-group function keys
    std::map<std::string, size_t> slot;   // input var -> index
    bool relaxed = false;
    std::string note;

    Solver(const EqSystem& s, const SystemSet& g, const std::map<std::string, ClosedForm>& f)
        : sys0(s), scc(g), solved(f) {
        sys = s;
        for (const auto& [k, v] : scc) keys.insert(k);
        keys.insert(sys.fn);
        for (size_t i = 0; i < sys.inputs.size(); ++i) slot[sys.inputs[i]] = i;
    }

    ClosedForm fallback(const std::string& why) {
        ClosedForm cf;
        cf.inputs = sys.inputs;
        cf.cases.push_back({{}, sys.lower ? se_int(0) : se_inf()});
        cf.exact = false;
        cf.pattern = "fallback";
        cf.note = why;
        return cf;
    }

    ClosedForm finish(ClosedForm cf, const std::string& pattern) {
        cf.inputs = sys.inputs;
        cf.pattern = pattern;
        cf.note = note;
        if (relaxed) cf.exact = false;
        // Residual call atoms mean an unresolved dependency: drop to the
        // direction's trivial bound.
        for (auto& c : cf.cases) {
            c.expr = se_canon(c.expr);
            if (se_contains_call(c.expr)) {
                c.expr = sys.lower ? se_int(0) : se_inf();
                cf.exact = false;
            }
        }
        return cf;
    }

    // --- preprocessing ----------------------------------------------------

    SEP inline_solved(const SEP& e) {
        return se_subst_calls(e, [&](const SymExpr& c) -> std::optional<SEP> {
            auto it = solved.find(call_key(c));
            if (it == solved.end()) return std::nullopt;
            return closed_form_apply(it->second, it->second.inputs, c.kids, sys.lower);
        });
    }

    // Self-calls whose guard-deciding arguments are constants resolving to a
    // unique call-free case get inlined (turns bounded recursion on a
    // constant-size argument into its value).
    SEP resolve_const_calls(const SEP& e) {
        return se_subst_calls(e, [&](const SymExpr& c) -> std::optional<SEP> {
            if (call_key(c) != sys.fn) return std::nullopt;
            if (c.kids.size() != sys.inputs.size()) return std::nullopt;
            for (const auto& a : c.kids)
                if (se_contains_call(a)) return std::nullopt;
            std::map<std::string, SEP> env;
            for (size_t i = 0; i < sys.inputs.size(); ++i)
                env[sys.inputs[i]] = se_canon(c.kids[i]);
            const Inequation* hit = nullptr;
            for (const auto& eq : sys.eqs) {
                Tri all = Tri::True;
                for (const auto& d : eq.guard) {
                    auto it = env.find(d.var);
                    Tri t = it == env.end() ? Tri::Unknown : decide_domcon(d, it->second);
                    if (t == Tri::False) {
                        all = Tri::False;
                        break;
                    }
                    if (t == Tri::Unknown) all = Tri::Unknown;
                }
                if (all == Tri::False) continue;
                if (all == Tri::Unknown) return std::nullopt;
                if (hit) return std::nullopt;  // not unique
                hit = &eq;
            }
            if (!hit || contains_scc_call(hit->rhs, keys)) return std::nullopt;
            return se_subst(hit->rhs, env);
        });
    }

    // Relevant slots: seeded by guard variables and variables occurring
    // outside recursive-call arguments, closed under data flow into
    // already-relevant argument positions.
    std::set<size_t> irrelevant_slots() {
        std::set<std::string> relevant;
        std::function<void(const SEP&)> seed = [&](const SEP& e) {
            if (e->kind == Kind::Call && keys.count(call_key(*e))) return;
            if (e->kind == Kind::Var) {
                relevant.insert(e->name);
                return;
            }
            for (const auto& k : e->kids) seed(k);
        };
        for (const auto& eq : sys.eqs) {
            for (const auto& d : eq.guard) relevant.insert(d.var);
            seed(eq.rhs);
        }
        auto collect_calls = [&](const SEP& e, auto&& self) -> void {
            if (e->kind == Kind::Call && call_key(*e) == sys.fn &&
                e->kids.size() == sys.inputs.size()) {
                for (size_t j = 0; j < e->kids.size(); ++j)
                    if (relevant.count(sys.inputs[j])) {
                        std::set<std::string> vs;
                        se_vars(e->kids[j], vs);
                        relevant.insert(vs.begin(), vs.end());
                    }
            }
            for (const auto& k : e->kids) self(k, self);
        };
        for (bool changed = true; changed;) {
            size_t before = relevant.size();
            for (const auto& eq : sys.eqs) collect_calls(eq.rhs, collect_calls);
            changed = relevant.size() != before;
        }
        std::set<size_t> irr;
        for (size_t j = 0; j < sys.inputs.size(); ++j)
            if (!relevant.count(sys.inputs[j])) irr.insert(j);
        return irr;
    }

    SEP unify_irrelevant(const SEP& e, const std::set<size_t>& irr) {
        return se_subst_calls(e, [&](const SymExpr& c) -> std::optional<SEP> {
            if (call_key(c) != sys.fn || c.kids.size() != sys.inputs.size())
                return std::nullopt;
            std::vector<SEP> args = c.kids;
            bool changed = false;
            for (size_t j : irr) {
                SEP v = se_var(sys.inputs[j]);
                if (!se_equal(args[j], v)) {
                    args[j] = v;
                    changed = true;
                }
            }
            if (!changed) return std::nullopt;
            return se_call(c.name, c.slot, std::move(args));
        });
    }

    // min/max cleanup: dominance pruning and common-call factoring.
    SEP simplify_minmax(const SEP& e) {
        std::vector<SEP> kids;
        kids.reserve(e->kids.size());
        for (const auto& k : e->kids) kids.push_back(simplify_minmax(k));
        SEP n = e;
        switch (e->kind) {
            case Kind::Add:
                n = se_add(std::move(kids));
                break;
            case Kind::Mul:
                n = se_mul(std::move(kids));
                break;
            case Kind::Pow:
                n = se_pow(e->c, kids[0]);
                break;
            case Kind::LinRec:
                n = se_linrec(e->coeffs, e->inits, e->addc, kids[0]);
                break;
            case Kind::Call:
                n = se_call(e->name, e->slot, std::move(kids));
                break;
            case Kind::Min:
            case Kind::Max: {
                bool is_min = e->kind == Kind::Min;
                // Dominance pruning (call atoms read as >= 0).
                std::vector<SEP> keep;
                for (const auto& cand : kids) {
                    bool drop = false;
                    for (auto& other : keep) {
                        if (is_min ? se_dominates(cand, other, sys.lows)
                                   : se_dominates(other, cand, sys.lows)) {
                            drop = true;
                            break;
                        }
                        if (is_min ? se_dominates(other, cand, sys.lows)
                                   : se_dominates(cand, other, sys.lows)) {
                            other = cand;
                            drop = true;
                            break;
                        }
                    }
                    if (!drop) keep.push_back(cand);
                }
                if (keep.size() == 1) return keep[0];
                // Common-call factoring: minmax(b_i + C) = minmax(b_i) + C.
                std::vector<Decomp> ds;
                bool factorable = true;
                for (const auto& k : keep) {
                    ds.push_back(decompose(k, keys));
                    if (!ds.back().ok || ds.back().calls.empty()) factorable = false;
                }
                if (factorable && keep.size() > 1) {
                    auto same = [&](const std::vector<CallPart>& a,
                                    const std::vector<CallPart>& b) {
                        if (a.size() != b.size()) return false;
                        for (size_t i = 0; i < a.size(); ++i)
                            if (!(a[i].coef == b[i].coef) ||
                                !se_equal(se_canon(a[i].call), se_canon(b[i].call)))
                                return false;
                        return true;
                    };
                    bool all_same = true;
                    for (size_t i = 1; i < ds.size(); ++i)
                        if (!same(ds[0].calls, ds[i].calls)) all_same = false;
                    if (all_same) {
                        std::vector<SEP> bases;
                        for (auto& d : ds) bases.push_back(d.base());
                        SEP shared = se_int(0);
                        for (const auto& cp : ds[0].calls)
                            shared = se_add2(shared, se_scale(cp.coef, cp.call));
                        SEP mm = is_min ? se_min(std::move(bases)) : se_max(std::move(bases));
                        return se_add2(mm, shared);
                    }
                }
                n = is_min ? se_min(std::move(keep)) : se_max(std::move(keep));
                break;
            }
            default:
                break;
        }
        return n;
    }

    // Direction-sound weakening of min/max atoms whose arguments mention
    // excluded variables: min loses arguments for upper bounds, max for
    // lower bounds; in the opposite pairing the whole atom drops to zero
    // when every argument is known non-negative.
    SEP relax_atoms(const SEP& e, const std::set<std::string>& banned) {
        std::vector<SEP> kids;
        kids.reserve(e->kids.size());
        for (const auto& k : e->kids) kids.push_back(relax_atoms(k, banned));
        auto mentions_banned = [&](const SEP& x) {
            std::set<std::string> vs;
            se_vars(x, vs);
            for (const auto& v : vs)
                if (banned.count(v)) return true;
            return false;
        };
        switch (e->kind) {
            case Kind::Add:
                return se_add(std::move(kids));
            case Kind::Mul:
                return se_mul(std::move(kids));
            case Kind::Pow:
                return se_pow(e->c, kids[0]);
            case Kind::Call:
                return se_call(e->name, e->slot, std::move(kids));
            case Kind::LinRec:
                return se_linrec(e->coeffs, e->inits, e->addc, kids[0]);
            case Kind::Min:
            case Kind::Max: {
                bool is_min = e->kind == Kind::Min;
                bool weaken_by_drop = is_min != sys.lower;  // min+upper or max+lower
                std::vector<SEP> keep;
                bool dropped = false;
                for (const auto& k : kids) {
                    if (mentions_banned(k) || se_contains_call(k))
                        dropped = true;
                    else
                        keep.push_back(k);
                }
                if (!dropped)
                    return is_min ? se_min(std::move(kids)) : se_max(std::move(kids));
                relaxed = true;
                if (weaken_by_drop && !keep.empty())
                    return is_min ? se_min(std::move(keep)) : se_max(std::move(keep));
                // Opposite pairing: the atom is bounded by zero from the
                // needed side when all arguments are non-negative sizes.
                bool all_nonneg = true;
                for (const auto& k : e->kids) {
                    std::set<std::string> vs;
                    se_vars(k, vs);
                    for (const auto& v : vs)
                        if (!sys.lows.count(v)) all_nonneg = false;
                }
                if (sys.lower && is_min && all_nonneg) return se_int(0);
                if (!sys.lower && !is_min && all_nonneg && !keep.empty())
                    return se_max(std::move(keep));
                return is_min ? se_min(std::move(kids)) : se_max(std::move(kids));
            }
            default:
                return e;
        }
    }

    // --- mutual recursion (P5) ---------------------------------------------

    std::optional<DomCon> pullback(const DomCon& d, const std::string& var, const SEP& arg) {
        // Guard over the callee input, translated through arg = var - c.
        SEP a = se_canon(arg);
        if (a->kind == Kind::Var && a->name == var) return DomCon{var, d.rel, d.k};
        SEP diff = se_canon(se_sub(se_var(var), a));
        auto c = se_as_const(diff);
        if (!c) return std::nullopt;
        return DomCon{var, d.rel, d.k + *c};
    }

    bool substitute_mutual() {
        for (int round = 0; round < 4; ++round) {
            bool any_foreign = false;
            std::vector<Inequation> next;
            bool ok = true;
            for (const auto& eq : sys.eqs) {
                // Find one foreign call to expand.
                const SymExpr* foreign = nullptr;
                std::function<void(const SEP&)> find = [&](const SEP& e) {
                    if (foreign) return;
                    if (e->kind == Kind::Call && keys.count(call_key(*e)) &&
                        call_key(*e) != sys.fn) {
                        foreign = e.get();
                        return;
                    }
                    for (const auto& k : e->kids) find(k);
                };
                find(eq.rhs);
                if (!foreign) {
                    next.push_back(eq);
                    continue;
                }
                any_foreign = true;
                auto git = scc.find(call_key(*foreign));
                if (git == scc.end()) {
                    ok = false;
                    break;
                }
                const EqSystem& callee = git->second;
                if (callee.inputs.size() != foreign->kids.size()) {
                    ok = false;
                    break;
                }
                for (const auto& ceq : callee.eqs) {
                    // Pull the callee guard back through the arguments. The
                    // callee input that a guard names must map to exactly one
                    // of our variables shifted by a constant.
                    std::vector<DomCon> guard = eq.guard;
                    bool gok = true;
                    std::map<std::string, SEP> cenv;
                    for (size_t i = 0; i < callee.inputs.size(); ++i)
                        cenv[callee.inputs[i]] = foreign->kids[i];
                    for (const auto& d : ceq.guard) {
                        auto ait = cenv.find(d.var);
                        if (ait == cenv.end()) {
                            gok = false;
                            break;
                        }
                        SEP a = se_canon(ait->second);
                        std::set<std::string> vs;
                        se_vars(a, vs);
                        if (vs.size() != 1) {
                            gok = false;
                            break;
                        }
                        auto pb = pullback(d, *vs.begin(), a);
                        if (!pb) {
                            gok = false;
                            break;
                        }
                        guard.push_back(*pb);
                    }
                    if (!gok) {
                        ok = false;
                        break;
                    }
                    SEP inldum = se_subst(ceq.rhs, cenv);
                    // Replace this one call occurrence.
                    bool replaced = false;
                    std::function<SEP(const SEP&)> repl = [&](const SEP& e) -> SEP {
                        if (!replaced && e.get() == foreign) {
                            replaced = true;
                            return inldum;
                        }
                        if (e->kids.empty()) return e;
                        std::vector<SEP> ks;
                        for (const auto& k : e->kids) ks.push_back(repl(k));
                        switch (e->kind) {
                            case Kind::Add:
                                return se_add(std::move(ks));
                            case Kind::Mul:
                                return se_mul(std::move(ks));
                            case Kind::Min:
                                return se_min(std::move(ks));
                            case Kind::Max:
                                return se_max(std::move(ks));
                            case Kind::Pow:
                                return se_pow(e->c, ks[0]);
                            case Kind::LinRec:
                                return se_linrec(e->coeffs, e->inits, e->addc, ks[0]);
                            case Kind::Call:
                                return se_call(e->name, e->slot, std::move(ks));
                            default:
                                return e;
                        }
                    };
                    Inequation neq;
                    neq.fn = sys.fn;
                    neq.lower = sys.lower;
                    neq.guard = guard;
                    neq.rhs = se_canon(repl(eq.rhs));
                    next.push_back(std::move(neq));
                }
                if (!ok) break;
            }
            if (!ok) return false;
            sys.eqs = std::move(next);
            if (!any_foreign) return true;
        }
        // Still foreign after the round limit.
        for (const auto& eq : sys.eqs)
            for (const auto& k : keys)
                if (k != sys.fn && contains_scc_call(eq.rhs, {k})) return false;
        return true;
    }

    // --- single-function patterns ------------------------------------------

    // Faulhaber sums: Sum_{j=0}^{m-1} j^q for q <= 4, as polynomials in m.
    static SEP faulhaber(int q, const SEP& m) {
        SEP m2 = se_mul2(m, m);
        switch (q) {
            case 0:
                return m;
            case 1:  // m(m-1)/2
                return se_scale(Rat(1, 2), se_sub(m2, m));
            case 2:  // m(m-1)(2m-1)/6
                return se_scale(Rat(1, 6),
                                se_mul2(se_sub(m2, m), se_sub(se_scale(Rat(2), m), se_int(1))));
            case 3:  // m^2 (m-1)^2 / 4
                return se_scale(Rat(1, 4), se_mul2(m2, se_mul2(se_sub(m, se_int(1)),
                                                               se_sub(m, se_int(1)))));
            case 4: {  // m(m-1)(2m-1)(3m^2-3m-1)/30
                SEP part = se_mul2(se_sub(m2, m),
                                   se_sub(se_scale(Rat(2), m), se_int(1)));
                SEP quad = se_add({se_scale(Rat(3), m2), se_scale(Rat(-3), m), se_int(-1)});
                return se_scale(Rat(1, 30), se_mul2(part, quad));
            }
            default:
                return nullptr;
        }
    }

    // g as a polynomial in var v with call-free coefficients not mentioning v.
    static bool poly_in(const SEP& g, const std::string& v, std::vector<SEP>& coeffs) {
        SEP c = se_canon(g);
        std::vector<SEP> terms = c->kind == Kind::Add ? c->kids : std::vector<SEP>{c};
        coeffs.assign(5, nullptr);
        for (const auto& t : terms) {
            std::vector<SEP> fs = t->kind == Kind::Mul ? t->kids : std::vector<SEP>{t};
            int deg = 0;
            std::vector<SEP> rest;
            for (const auto& f : fs) {
                if (f->kind == Kind::Var && f->name == v) {
                    ++deg;
                    continue;
                }
                std::set<std::string> vs;
                se_vars(f, vs);
                if (vs.count(v)) return false;  // v hidden inside an atom
                rest.push_back(f);
            }
            if (deg > 4) return false;
            SEP coeff = se_mul(std::move(rest));
            coeffs[deg] = coeffs[deg] ? se_add2(coeffs[deg], coeff) : coeff;
        }
        for (auto& c2 : coeffs)
            if (!c2) c2 = se_int(0);
        return true;
    }

    struct BaseCase {
        Rat point;
        SEP value;
        std::vector<DomCon> extra;  // guard constraints besides the Eq
        size_t eq_index;
    };

    // Base equations pinning variable v by equality.
    std::vector<BaseCase> bases_on(const std::string& v,
                                   const std::vector<const Inequation*>& base_eqs) {
        std::vector<BaseCase> out;
        for (size_t i = 0; i < base_eqs.size(); ++i) {
            const auto& eq = *base_eqs[i];
            std::optional<Rat> pt;
            std::vector<DomCon> extra;
            for (const auto& d : eq.guard) {
                if (d.var == v && d.rel == DomCon::Rel::Eq && !pt)
                    pt = d.k;
                else
                    extra.push_back(d);
            }
            if (!pt) continue;
            SEP val = se_canon(se_subst(eq.rhs, {{v, se_const(*pt)}}));
            out.push_back(BaseCase{*pt, val, extra, i});
        }
        return out;
    }

    // Sum_{j=0}^{m-1} g(v - j k) + B as a closed polynomial.
    std::optional<SEP> p1_sum(const SEP& g, const std::string& v, const Rat& k,
                              const Rat& exit_point, const SEP& base_value) {
        std::vector<SEP> gc;
        if (!poly_in(g, v, gc)) return std::nullopt;
        // h(j) = g(v - j k) expanded in powers of j.
        // (v - jk)^p = sum_q C(p,q) v^(p-q) (-k)^q j^q
        static const long long binom[5][5] = {{1, 0, 0, 0, 0},
                                              {1, 1, 0, 0, 0},
                                              {1, 2, 1, 0, 0},
                                              {1, 3, 3, 1, 0},
                                              {1, 4, 6, 4, 1}};
        std::vector<SEP> h(5, se_int(0));
        SEP vv = se_var(v);
        for (int p = 0; p <= 4; ++p) {
            if (se_equal(se_canon(gc[p]), se_int(0))) continue;
            for (int q = 0; q <= p; ++q) {
                Rat mk = Rat(1);
                for (int i = 0; i < q; ++i) mk = mk * (Rat(0) - k);
                SEP vpow = se_int(1);
                for (int i = 0; i < p - q; ++i) vpow = se_mul2(vpow, vv);
                h[q] = se_add2(h[q], se_mul({gc[p], se_const(Rat(binom[p][q])), se_const(mk),
                                             vpow}));
            }
        }
        SEP m = se_scale(Rat(1) / k, se_sub(vv, se_const(exit_point)));
        SEP s = base_value;
        for (int q = 0; q <= 4; ++q) {
            if (se_equal(se_canon(h[q]), se_int(0))) continue;
            SEP f = faulhaber(q, m);
            if (!f) return std::nullopt;
            s = se_add2(s, se_mul2(h[q], f));
        }
        return se_canon(s);
    }

    ClosedForm assemble(const std::vector<ClosedForm::Case>& leftover_first,
                        ClosedForm::Case general, bool exact, const std::string& pattern) {
        ClosedForm cf;
        cf.cases = leftover_first;
        cf.cases.push_back(std::move(general));
        cf.exact = exact;
        return finish(std::move(cf), pattern);
    }

    ClosedForm run() {
        // Preprocess every equation.
        for (auto& eq : sys.eqs) eq.rhs = se_canon(inline_solved(eq.rhs));
        bool has_foreign = false;
        for (const auto& eq : sys.eqs)
            for (const auto& k : keys)
                if (k != sys.fn && contains_scc_call(eq.rhs, {k})) has_foreign = true;
        if (has_foreign) {
            if (!substitute_mutual()) return fallback("mutual recursion not reducible");
            note = "mutual recursion reduced by substitution";
        }
        for (int i = 0; i < 3; ++i) {
            bool changed = false;
            for (auto& eq : sys.eqs) {
                SEP r = se_canon(resolve_const_calls(eq.rhs));
                if (!se_equal(r, eq.rhs)) changed = true;
                eq.rhs = r;
            }
            if (!changed) break;
        }
        auto irr = irrelevant_slots();
        if (!irr.empty())
            for (auto& eq : sys.eqs) eq.rhs = se_canon(unify_irrelevant(eq.rhs, irr));
        for (auto& eq : sys.eqs) eq.rhs = se_canon(simplify_minmax(eq.rhs));

        return dispatch(has_foreign);
    }

    ClosedForm dispatch(bool was_mutual) {
        std::vector<const Inequation*> base_eqs, rec_eqs;
        for (const auto& eq : sys.eqs)
            (contains_scc_call(eq.rhs, {sys.fn}) ? rec_eqs : base_eqs).push_back(&eq);

        if (rec_eqs.empty()) {
            ClosedForm cf;
            bool all_equal = true;
            for (const auto* eq : base_eqs) {
                cf.cases.push_back({eq->guard, eq->rhs});
                if (!se_equal(se_canon(eq->rhs), se_canon(base_eqs[0]->rhs)))
                    all_equal = false;
            }
            if (all_equal && !cf.cases.empty()) {
                cf.cases = {{std::vector<DomCon>{}, base_eqs[0]->rhs}};
            }
            cf.exact = true;
            return finish(std::move(cf), was_mutual ? "P5" : "P4");
        }

        // Merge recursive equations that coincide after preprocessing.
        const Inequation* rec = rec_eqs[0];
        std::vector<DomCon> rec_guard = rec->guard;
        if (rec_eqs.size() > 1) {
            for (size_t i = 1; i < rec_eqs.size(); ++i)
                if (!se_equal(se_canon(rec_eqs[i]->rhs), se_canon(rec->rhs)))
                    return tryRelaxThen([&] { return fallback("multiple recursive cases"); });
            // Same rhs: keep only the guard constraints common to all cases.
            std::vector<DomCon> common;
            for (const auto& d : rec_guard) {
                bool everywhere = true;
                for (auto* re : rec_eqs) {
                    bool found = false;
                    for (const auto& d2 : re->guard)
                        if (domcon_equal(d, d2)) found = true;
                    if (!found) everywhere = false;
                }
                if (everywhere) common.push_back(d);
            }
            rec_guard = common;
        }

        SEP rhs = se_canon(rec->rhs);

        // min/max accumulator: rhs is a single min/max containing the call.
        if ((rhs->kind == Kind::Min || rhs->kind == Kind::Max))
            if (auto cf = try_minmax_acc(rhs, rec_guard, base_eqs)) return *cf;

        Decomp d = decompose(rhs, {sys.fn});
        if (!d.ok) {
            return tryRelaxThen([&] { return fallback("unsupported recursive shape"); });
        }
        if (d.calls.size() == 1) {
            ArgShape as = arg_shape(*d.calls[0].call, sys.inputs);
            if (!as.ok || as.decs.empty())
                return tryRelaxThen([&] { return fallback("recursive argument not a constant decrement"); });
            if (d.calls[0].coef == Rat(1)) {
                if (as.decs.size() == 1) {
                    if (auto cf = try_p1(d, as, rec_guard, base_eqs)) return *cf;
                    return tryRelaxThen([&] { return fallback("no solvable first-order pattern"); });
                }
                if (auto cf = try_pmulti(d, as, rec_guard, base_eqs)) return *cf;
                return tryRelaxThen([&] { return fallback("multi-argument recursion not uniform"); });
            }
            if (Rat(1) < d.calls[0].coef && as.decs.size() == 1) {
                if (auto cf = try_p2(d, as, rec_guard, base_eqs)) return *cf;
            }
            return tryRelaxThen([&] { return fallback("unsupported call coefficient"); });
        }
        if (d.calls.size() >= 2) {
            if (auto cf = try_p3(d, rec_guard, base_eqs)) return *cf;
            return tryRelaxThen([&] { return fallback("multiple recursive calls"); });
        }
        return fallback("unclassified system");
    }

    // Retry once after relaxing atoms that block the patterns.
    template <typename F>
    ClosedForm tryRelaxThen(F&& fb) {
        if (relaxed) return fb();  // already relaxed once
        // Ban: variables that change across iterations. Conservatively, every
        // variable that appears non-invariantly in some self-call argument.
        std::set<std::string> banned;
        for (const auto& eq : sys.eqs) {
            std::function<void(const SEP&)> scan = [&](const SEP& e) {
                if (e->kind == Kind::Call && call_key(*e) == sys.fn &&
                    e->kids.size() == sys.inputs.size()) {
                    for (size_t j = 0; j < e->kids.size(); ++j) {
                        SEP a = se_canon(e->kids[j]);
                        if (a->kind == Kind::Var && a->name == sys.inputs[j]) continue;
                        std::set<std::string> vs;
                        se_vars(a, vs);
                        banned.insert(vs.begin(), vs.end());
                        banned.insert(sys.inputs[j]);
                    }
                }
                for (const auto& k : e->kids) scan(k);
            };
            scan(eq.rhs);
        }
        bool changed = false;
        EqSystem saved = sys;
        for (auto& eq : sys.eqs) {
            SEP r = se_canon(simplify_minmax(relax_atoms(eq.rhs, banned)));
            if (!se_equal(r, eq.rhs)) changed = true;
            eq.rhs = r;
        }
        if (!changed || !relaxed) {
            sys = saved;
            return fb();
        }
        note = note.empty() ? "relaxed min/max atoms" : note + "; relaxed min/max atoms";
        return dispatch(false);
    }

    std::optional<ClosedForm> try_minmax_acc(const SEP& rhs,
                                             const std::vector<DomCon>& rec_guard,
                                             const std::vector<const Inequation*>& base_eqs) {
        bool is_min = rhs->kind == Kind::Min;
        const SymExpr* call = nullptr;
        std::vector<SEP> others;
        for (const auto& k : rhs->kids) {
            if (k->kind == Kind::Call && call_key(*k) == sys.fn && !call) {
                call = k.get();
                continue;
            }
            if (contains_scc_call(k, {sys.fn})) return std::nullopt;
            others.push_back(k);
        }
        if (!call) return std::nullopt;
        ArgShape as = arg_shape(*call, sys.inputs);
        if (!as.ok || as.decs.empty()) return std::nullopt;
        // Other arguments must not change across iterations.
        for (const auto& o : others) {
            std::set<std::string> vs;
            se_vars(o, vs);
            for (const auto& [j, k] : as.decs)
                if (vs.count(sys.inputs[j])) return std::nullopt;
        }
        // Base value: substitute the exit point into the base cases.
        size_t dj = as.decs.begin()->first;
        auto bs = bases_on(sys.inputs[dj], base_eqs);
        if (bs.empty()) return std::nullopt;
        std::vector<SEP> base_vals;
        for (const auto& b : bs) base_vals.push_back(b.value);
        SEP B = sys.lower ? se_min(base_vals) : se_max(base_vals);
        std::vector<SEP> flat = others;
        flat.push_back(B);
        SEP expr = is_min ? se_min(std::move(flat)) : se_max(std::move(flat));
        // Valid from the smallest base point upward.
        Rat minpt = bs[0].point;
        for (const auto& b : bs)
            if (b.point < minpt) minpt = b.point;
        ClosedForm::Case gen;
        gen.guard.push_back(DomCon{sys.inputs[dj], DomCon::Rel::Ge, minpt});
        for (const auto& dcon : rec_guard)
            if (dcon.var != sys.inputs[dj]) gen.guard.push_back(dcon);
        gen.expr = expr;
        ClosedForm cf;
        cf.cases.push_back(std::move(gen));
        cf.exact = bs.size() == 1;
        return finish(std::move(cf), is_min ? "min-acc" : "max-acc");
    }

    std::optional<ClosedForm> try_p1(const Decomp& d, const ArgShape& as,
                                     const std::vector<DomCon>& rec_guard,
                                     const std::vector<const Inequation*>& base_eqs) {
        size_t dj = as.decs.begin()->first;
        Rat k = as.decs.begin()->second;
        if (!(k.den == 1) || k.num < 1) return std::nullopt;
        const std::string& v = sys.inputs[dj];
        // Threshold: strongest lower constraint on v in the recursive guard.
        std::optional<Rat> thr;
        for (const auto& dc : rec_guard) {
            if (dc.var != v) continue;
            std::optional<Rat> t;
            if (dc.rel == DomCon::Rel::Gt) t = dc.k;
            if (dc.rel == DomCon::Rel::Ge) t = dc.k - Rat(1);
            if (t && (!thr || *thr < *t)) thr = t;
        }
        auto bs = bases_on(v, base_eqs);
        if (!thr) {
            // No explicit guard: the largest base point acts as threshold.
            if (bs.empty()) return std::nullopt;
            Rat mx = bs[0].point;
            for (const auto& b : bs)
                if (mx < b.point) mx = b.point;
            thr = mx;
        }
        // Exit points thr, thr-1, ..., thr-k+1; each needs a base value.
        std::vector<const BaseCase*> exits;
        for (long long i = 0; i < k.num; ++i) {
            Rat pt = *thr - Rat(i);
            const BaseCase* hit = nullptr;
            for (const auto& b : bs)
                if (b.point == pt) hit = &b;
            if (!hit) return std::nullopt;
            exits.push_back(hit);
        }
        SEP F = [&]() -> SEP {
            auto s = p1_sum(d.base(), v, k, exits[0]->point, exits[0]->value);
            return s ? *s : nullptr;
        }();
        if (!F) return std::nullopt;
        // Cross-residue consistency for k > 1.
        for (size_t i = 1; i < exits.size(); ++i) {
            SEP at = se_canon(se_subst(F, {{v, se_const(exits[i]->point)}}));
            if (!se_equal(at, se_canon(exits[i]->value))) return std::nullopt;
        }
        // Absorbed general case: v >= min exit point.
        Rat minpt = exits[0]->point;
        for (const auto* e : exits)
            if (e->point < minpt) minpt = e->point;
        ClosedForm::Case gen;
        gen.guard.push_back(DomCon{v, DomCon::Rel::Ge, minpt});
        for (const auto& dc : rec_guard)
            if (dc.var != v) gen.guard.push_back(dc);
        gen.expr = F;
        // Leftover bases not used as exits stay as their own cases.
        std::vector<ClosedForm::Case> leftovers;
        std::set<size_t> used;
        for (const auto* e : exits) used.insert(e->eq_index);
        for (size_t i = 0; i < base_eqs.size(); ++i) {
            bool is_exit = false;
            for (const auto& b : bs)
                if (b.eq_index == i && used.count(i)) is_exit = true;
            if (!is_exit) leftovers.push_back({base_eqs[i]->guard, base_eqs[i]->rhs});
        }
        return assemble(leftovers, std::move(gen), true, "P1");
    }

    std::optional<ClosedForm> try_p2(const Decomp& d, const ArgShape& as,
                                     const std::vector<DomCon>& rec_guard,
                                     const std::vector<const Inequation*>& base_eqs) {
        size_t dj = as.decs.begin()->first;
        Rat k = as.decs.begin()->second;
        if (!(k == Rat(1))) return std::nullopt;
        const std::string& v = sys.inputs[dj];
        Rat a = d.calls[0].coef;
        SEP g = se_canon(d.base());
        auto c = se_as_const(g);
        if (!c) return std::nullopt;
        auto bs = bases_on(v, base_eqs);
        std::optional<Rat> thr;
        for (const auto& dc : rec_guard) {
            if (dc.var != v) continue;
            std::optional<Rat> t;
            if (dc.rel == DomCon::Rel::Gt) t = dc.k;
            if (dc.rel == DomCon::Rel::Ge) t = dc.k - Rat(1);
            if (t && (!thr || *thr < *t)) thr = t;
        }
        if (!thr && !bs.empty()) thr = bs[0].point;
        if (!thr) return std::nullopt;
        const BaseCase* exit = nullptr;
        for (const auto& b : bs)
            if (b.point == *thr) exit = &b;
        if (!exit) return std::nullopt;
        // f(v) = (B + c/(a-1)) a^(v-t) - c/(a-1)
        Rat shift = *c / (a - Rat(1));
        SEP F = se_add2(se_mul2(se_add2(exit->value, se_const(shift)),
                                se_pow(a, se_sub(se_var(v), se_const(exit->point)))),
                        se_const(Rat(0) - shift));
        ClosedForm::Case gen;
        gen.guard.push_back(DomCon{v, DomCon::Rel::Ge, exit->point});
        for (const auto& dc : rec_guard)
            if (dc.var != v) gen.guard.push_back(dc);
        gen.expr = F;
        std::vector<ClosedForm::Case> leftovers;
        for (size_t i = 0; i < base_eqs.size(); ++i)
            if (exit->eq_index != i)
                leftovers.push_back({base_eqs[i]->guard, base_eqs[i]->rhs});
        return assemble(leftovers, std::move(gen), true, "P2");
    }

    std::optional<ClosedForm> try_p3(const Decomp& d,
                                     const std::vector<DomCon>& rec_guard,
                                     const std::vector<const Inequation*>& base_eqs) {
        // f(v) = sum_i c_i f(v - k_i) + g, g and bases constant.
        std::optional<size_t> dj;
        long long K = 0;
        std::map<long long, Rat> coefs;
        for (const auto& cp : d.calls) {
            ArgShape as = arg_shape(*cp.call, sys.inputs);
            if (!as.ok || as.decs.size() != 1) return std::nullopt;
            size_t j = as.decs.begin()->first;
            Rat k = as.decs.begin()->second;
            if (dj && *dj != j) return std::nullopt;
            dj = j;
            if (k.den != 1 || k.num < 1 || k.num > 8) return std::nullopt;
            coefs[k.num] = coefs.count(k.num) ? coefs[k.num] + cp.coef : cp.coef;
            K = std::max(K, k.num);
        }
        if (!dj) return std::nullopt;
        const std::string& v = sys.inputs[*dj];
        SEP g = se_canon(d.base());
        auto gc = se_as_const(g);
        if (!gc) return std::nullopt;
        auto bs = bases_on(v, base_eqs);
        // Need constant inits at exactly 0 .. K-1.
        std::vector<Rat> inits;
        std::set<size_t> used;
        for (long long i = 0; i < K; ++i) {
            const BaseCase* hit = nullptr;
            for (const auto& b : bs)
                if (b.point == Rat(i)) hit = &b;
            if (!hit) return std::nullopt;
            auto bc = se_as_const(se_canon(hit->value));
            if (!bc) return std::nullopt;
            inits.push_back(*bc);
            used.insert(hit->eq_index);
        }
        std::vector<Rat> coeffs;
        for (long long i = 1; i <= K; ++i)
            coeffs.push_back(coefs.count(i) ? coefs[i] : Rat(0));
        SEP F = se_linrec(coeffs, inits, *gc, se_var(v));
        ClosedForm::Case gen;
        gen.guard.push_back(DomCon{v, DomCon::Rel::Ge, Rat(0)});
        for (const auto& dc : rec_guard)
            if (dc.var != v) gen.guard.push_back(dc);
        gen.expr = F;
        std::vector<ClosedForm::Case> leftovers;
        for (size_t i = 0; i < base_eqs.size(); ++i)
            if (!used.count(i)) leftovers.push_back({base_eqs[i]->guard, base_eqs[i]->rhs});
        return assemble(leftovers, std::move(gen), true, "P3");
    }

    std::optional<ClosedForm> try_pmulti(const Decomp& d, const ArgShape& as,
                                         const std::vector<DomCon>& rec_guard,
                                         const std::vector<const Inequation*>& base_eqs) {
        // One call decrementing several slots by the same k; constant-equal
        // bases; invariant g: f = (g/k) min_j(v_j - b_j) + B.
        Rat k = as.decs.begin()->second;
        for (const auto& [j, kj] : as.decs)
            if (!(kj == k)) return std::nullopt;
        if (k.den != 1 || k.num < 1) return std::nullopt;
        SEP g = se_canon(d.base());
        // g must not mention any designated slot.
        std::set<std::string> gv;
        se_vars(g, gv);
        for (const auto& [j, kj] : as.decs)
            if (gv.count(sys.inputs[j])) return std::nullopt;
        // Every designated slot needs a base pinned at some point with equal
        // values across all base equations.
        std::map<size_t, Rat> basept;
        std::optional<SEP> B;
        for (const auto* eq : base_eqs) {
            SEP val = se_canon(eq->rhs);
            if (B && !se_equal(*B, val)) return std::nullopt;
            if (!B) B = val;
            for (const auto& dc : eq->guard)
                if (dc.rel == DomCon::Rel::Eq)
                    for (const auto& [j, kj] : as.decs)
                        if (dc.var == sys.inputs[j] && !basept.count(j)) basept[j] = dc.k;
        }
        if (!B) return std::nullopt;
        std::set<std::string> bv;
        se_vars(*B, bv);
        for (const auto& [j, kj] : as.decs)
            if (bv.count(sys.inputs[j])) return std::nullopt;
        for (const auto& [j, kj] : as.decs)
            if (!basept.count(j)) return std::nullopt;
        std::vector<SEP> diffs;
        for (const auto& [j, kj] : as.decs)
            diffs.push_back(se_sub(se_var(sys.inputs[j]), se_const(basept[j])));
        SEP m = se_scale(Rat(1) / k, se_min(std::move(diffs)));
        SEP F = se_add2(se_mul2(g, m), *B);
        ClosedForm::Case gen;
        std::set<std::string> desig;
        for (const auto& [j, kj] : as.decs) {
            gen.guard.push_back(DomCon{sys.inputs[j], DomCon::Rel::Ge, basept[j]});
            desig.insert(sys.inputs[j]);
        }
        for (const auto& dc : rec_guard)
            if (!desig.count(dc.var)) gen.guard.push_back(dc);
        gen.expr = F;
        ClosedForm cf;
        cf.cases.push_back(std::move(gen));
        cf.exact = true;
        return finish(std::move(cf), "P-multi");
    }
};

}  // namespace

ClosedForm solve_system(const EqSystem& sys, const SystemSet& scc,
                        const std::map<std::string, ClosedForm>& solved) {
    Solver s(sys, scc, solved);
    return s.run();
}

ClosedForm solve(const EqSystem& sys) {
    SystemSet one;
    one[sys.fn] = sys;
    return solve_system(sys, one, {});
}

// ---------------------------------------------------------------------------
// Complexity orders

namespace {

// (exponential class, polynomial degree) ranking of one monomial term.
std::pair<int, int> term_rank(const SEP& t) {
    std::vector<SEP> fs = t->kind == Kind::Mul ? t->kids : std::vector<SEP>{t};
    int cls = 0, deg = 0;
    for (const auto& f : fs) {
        switch (f->kind) {
            case Kind::Pow:
                if (Rat(1) < f->c) cls = 1;
                break;
            case Kind::LinRec:
                cls = 1;
                break;
            case Kind::Const:
                break;
            default:
                ++deg;
        }
    }
    return {cls, deg};
}

SEP strip_const(const SEP& t) {
    std::vector<SEP> fs = t->kind == Kind::Mul ? t->kids : std::vector<SEP>{t};
    std::vector<SEP> keep;
    for (const auto& f : fs)
        if (f->kind != Kind::Const) keep.push_back(f);
    if (keep.empty()) return se_int(1);
    return se_mul(std::move(keep));
}

SEP drop_const_term(const SEP& e) {
    SEP c = se_canon(e);
    if (c->kind != Kind::Add) return se_as_const(c) ? c : c;
    std::vector<SEP> keep;
    for (const auto& k : c->kids)
        if (!se_as_const(k)) keep.push_back(k);
    if (keep.empty()) return c;
    return se_add(std::move(keep));
}

SEP order_factor(const SEP& f, const std::map<std::string, Rat>& lows);

SEP order_term(const SEP& t, const std::map<std::string, Rat>& lows) {
    SEP bare = strip_const(t);
    std::vector<SEP> fs = bare->kind == Kind::Mul ? bare->kids : std::vector<SEP>{bare};
    std::vector<SEP> out;
    for (const auto& f : fs) out.push_back(order_factor(f, lows));
    return se_mul(std::move(out));
}

SEP order_factor(const SEP& f, const std::map<std::string, Rat>& lows) {
    switch (f->kind) {
        case Kind::Min:
        case Kind::Max: {
            std::vector<SEP> ks;
            for (const auto& k : f->kids) ks.push_back(order_of(k, lows));
            return f->kind == Kind::Min ? se_min(std::move(ks)) : se_max(std::move(ks));
        }
        case Kind::Pow:
            return se_pow(f->c, drop_const_term(f->kids[0]));
        case Kind::LinRec:
            return se_linrec(f->coeffs, f->inits, f->addc, drop_const_term(f->kids[0]));
        default:
            return f;
    }
}

}  // namespace

SEP order_of(const SEP& bound, const std::map<std::string, Rat>& lows) {
    SEP c = se_canon(bound);
    if (se_is_inf(c)) return se_inf();
    std::vector<SEP> terms = c->kind == Kind::Add ? c->kids : std::vector<SEP>{c};
    std::pair<int, int> best{-1, -1};
    for (const auto& t : terms) best = std::max(best, term_rank(t));
    std::vector<SEP> winners;
    for (const auto& t : terms)
        if (term_rank(t) == best) {
            SEP o = se_canon(order_term(t, lows));
            bool dup = false;
            for (const auto& w : winners)
                if (se_equal(w, o)) dup = true;
            if (!dup) winners.push_back(o);
        }
    if (winners.empty()) return se_int(1);
    if (best == std::pair<int, int>{0, 0}) return se_int(1);
    return se_add(std::move(winners));
}

SEP order_of_form(const ClosedForm& cf, const std::map<std::string, Rat>& lows) {
    std::vector<SEP> cands;
    for (const auto& c : cf.cases) cands.push_back(order_of(c.expr, lows));
    if (cands.empty()) return se_int(1);
    SEP best = cands[0];
    auto rank_of = [&](const SEP& e) {
        std::vector<SEP> ts = e->kind == Kind::Add ? e->kids : std::vector<SEP>{e};
        std::pair<int, int> r{-1, -1};
        for (const auto& t : ts) r = std::max(r, term_rank(t));
        return r;
    };
    for (size_t i = 1; i < cands.size(); ++i) {
        if (se_is_inf(best)) break;
        if (se_is_inf(cands[i])) {
            best = cands[i];
            continue;
        }
        if (rank_of(cands[i]) > rank_of(best)) best = cands[i];
    }
    return best;
}

// ---------------------------------------------------------------------------
// Printing

std::string closed_form_str(const ClosedForm& cf) {
    std::ostringstream os;
    for (size_t i = 0; i < cf.cases.size(); ++i) {
        if (i) os << " | ";
        if (!cf.cases[i].guard.empty()) os << guard_str(cf.cases[i].guard) << ": ";
        os << se_str(cf.cases[i].expr);
    }
    if (!cf.exact) os << " (approx)";
    return os.str();
}

std::string eqsystem_str(const EqSystem& sys) {
    std::ostringstream os;
    os << sys.fn << "(";
    for (size_t i = 0; i < sys.inputs.size(); ++i) {
        if (i) os << ",";
        os << sys.inputs[i];
    }
    os << ")" << (sys.lower ? " >= " : " <= ") << "{\n";
    for (const auto& eq : sys.eqs) {
        os << "  ";
        if (eq.fn != sys.fn) os << eq.fn << " := ";
        os << se_str(eq.rhs);
        if (!eq.guard.empty()) os << "  if " << guard_str(eq.guard);
        os << "\n";
    }
    os << "}";
    return os.str();
}

}  // namespace sra
