#include "sra/auxdomains.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

#include "sra/util.hpp"

namespace sra {

namespace {

// ----- single-variable numeric regions -------------------------------------

struct Interval {
    bool lo_inf = true, hi_inf = true;
    Rat lo, hi;
    bool lo_open = false, hi_open = false;
};

bool iv_empty(const Interval& v) {
    if (v.lo_inf || v.hi_inf) return false;
    if (v.hi < v.lo) return true;
    if (v.lo == v.hi) return v.lo_open || v.hi_open;
    return false;
}

Interval iv_intersect(const Interval& a, const Interval& b) {
    Interval r;
    if (a.lo_inf) {
        r.lo_inf = b.lo_inf;
        r.lo = b.lo;
        r.lo_open = b.lo_open;
    } else if (b.lo_inf || b.lo < a.lo) {
        r.lo_inf = false;
        r.lo = a.lo;
        r.lo_open = a.lo_open;
    } else if (a.lo < b.lo) {
        r.lo_inf = false;
        r.lo = b.lo;
        r.lo_open = b.lo_open;
    } else {
        r.lo_inf = false;
        r.lo = a.lo;
        r.lo_open = a.lo_open || b.lo_open;
    }
    if (a.hi_inf) {
        r.hi_inf = b.hi_inf;
        r.hi = b.hi;
        r.hi_open = b.hi_open;
    } else if (b.hi_inf || a.hi < b.hi) {
        r.hi_inf = false;
        r.hi = a.hi;
        r.hi_open = a.hi_open;
    } else if (b.hi < a.hi) {
        r.hi_inf = false;
        r.hi = b.hi;
        r.hi_open = b.hi_open;
    } else {
        r.hi_inf = false;
        r.hi = a.hi;
        r.hi_open = a.hi_open || b.hi_open;
    }
    return r;
}

using IvSet = std::vector<Interval>;

IvSet ivs_intersect(const IvSet& a, const IvSet& b) {
    IvSet out;
    for (const auto& x : a)
        for (const auto& y : b) {
            Interval r = iv_intersect(x, y);
            if (!iv_empty(r)) out.push_back(r);
        }
    return out;
}

bool iv_contains(const Interval& v, const Rat& k) {
    if (!v.lo_inf) {
        if (k < v.lo) return false;
        if (k == v.lo && v.lo_open) return false;
    }
    if (!v.hi_inf) {
        if (v.hi < k) return false;
        if (k == v.hi && v.hi_open) return false;
    }
    return true;
}

bool ivs_contain(const IvSet& s, const Rat& k) {
    for (const auto& v : s)
        if (iv_contains(v, k)) return true;
    return false;
}

// Does some interval of s cover the whole open cell (a,b)?
bool ivs_cover_open(const IvSet& s, bool a_inf, const Rat& a, bool b_inf, const Rat& b) {
    for (const auto& v : s) {
        bool lo_ok = v.lo_inf || (!a_inf && (v.lo < a || v.lo == a));
        bool hi_ok = v.hi_inf || (!b_inf && (b < v.hi || v.hi == b));
        if (lo_ok && hi_ok) return true;
    }
    return false;
}

IvSet iv_full() { return {Interval{}}; }

// Guard intervals for `V op k`.
IvSet guard_ivs(const std::string& op, const Rat& k) {
    Interval lo_side;  // (-inf, k ...)
    lo_side.hi_inf = false;
    lo_side.hi = k;
    Interval hi_side;  // (... k, inf)
    hi_side.lo_inf = false;
    hi_side.lo = k;
    if (op == "<") {
        lo_side.hi_open = true;
        return {lo_side};
    }
    if (op == "=<") return {lo_side};
    if (op == ">") {
        hi_side.lo_open = true;
        return {hi_side};
    }
    if (op == ">=") return {hi_side};
    if (op == "=:=") {
        Interval p;
        p.lo_inf = p.hi_inf = false;
        p.lo = p.hi = k;
        return {p};
    }
    if (op == "=\\=") {
        lo_side.hi_open = true;
        hi_side.lo_open = true;
        return {lo_side, hi_side};
    }
    return iv_full();
}

std::string flip_op(const std::string& op) {
    if (op == "<") return ">";
    if (op == ">") return "<";
    if (op == "=<") return ">=";
    if (op == ">=") return "=<";
    return op;  // =:= and =\= are symmetric
}

// ----- per-argument region --------------------------------------------------

struct Region {
    enum class K { Any, Ctor, Num } k = K::Any;
    std::string tag;       // Ctor
    bool partial = false;  // nested non-variable subpattern
    IvSet ivs;             // Num
    // Spine length of a list pattern whose element slots are all variables:
    // [] -> [0,0], [X|Xs] -> [1,inf), [X] -> [1,1], [X,Y|Ys] -> [2,inf).
    bool len_known = false;
    Rat len_lo;
    bool len_hi_inf = false;
    Rat len_hi;
};

std::string ctor_tag(const TermPtr& t) {
    if (is_nil(t)) return "[]";
    if (is_cons(t)) return "./2";
    return t->name + "/" + std::to_string(t->args.size());
}

bool spine_stats(const TermPtr& t, Rat& lo, bool& hi_inf, Rat& hi) {
    if (is_nil(t)) {
        lo = hi = Rat(0);
        hi_inf = false;
        return true;
    }
    if (is_cons(t)) {
        if (t->args[0]->kind != Term::Kind::Var) return false;
        const TermPtr& tail = t->args[1];
        if (tail->kind == Term::Kind::Var) {
            lo = Rat(1);
            hi_inf = true;
            return true;
        }
        Rat slo, shi;
        bool sinf = false;
        if (!spine_stats(tail, slo, sinf, shi)) return false;
        lo = slo + Rat(1);
        hi_inf = sinf;
        if (!sinf) hi = shi + Rat(1);
        return true;
    }
    return false;
}

bool len_ranges_disjoint(const Region& a, const Region& b) {
    if (!a.len_known || !b.len_known) return false;
    if (!a.len_hi_inf && a.len_hi < b.len_lo) return true;
    if (!b.len_hi_inf && b.len_hi < a.len_lo) return true;
    return false;
}

bool regions_disjoint(const Region& a, const Region& b) {
    if (a.k == Region::K::Any || b.k == Region::K::Any) return false;
    if (a.k == Region::K::Ctor && b.k == Region::K::Ctor)
        return a.tag != b.tag || len_ranges_disjoint(a, b);
    if (a.k == Region::K::Num && b.k == Region::K::Num)
        return ivs_intersect(a.ivs, b.ivs).empty();
    return true;  // a constructor term never equals a number
}

// Two comparisons on the same ordered variable pair that cannot both hold.
bool ops_disjoint(const std::string& x, const std::string& y) {
    static const std::map<std::string, std::set<std::string>> tbl = {
        {">", {"=<", "<", "=:="}},  {"<", {">=", ">", "=:="}},
        {">=", {"<"}},              {"=<", {">"}},
        {"=:=", {"=\\=", "<", ">"}}, {"=\\=", {"=:="}},
    };
    auto it = tbl.find(x);
    return it != tbl.end() && it->second.count(y) > 0;
}

// ----- clause facts ----------------------------------------------------------

// A two-variable comparison between bound input arguments, seen before the
// clause does any work beyond selection. Normalized so lo_arg < hi_arg.
struct VVGuard {
    size_t lo_arg = 0, hi_arg = 0;
    std::string op;
};

struct ClauseFacts {
    bool possible = true;   // false: a constant guard is statically false
    bool safe = true;       // body cannot fail beyond head match + guards
    std::vector<std::string> callees;
    std::vector<Region> regions;       // indexed by input-arg order
    std::vector<Region> lead_regions;  // restrictions decided at selection time
    std::vector<VVGuard> vv_guards;    // leading two-variable tests
};

struct PredData {
    std::string key;
    const EntryDecl* entry = nullptr;
    std::vector<const Clause*> clauses;
    std::vector<size_t> input_args;          // argument positions with mode +
    std::vector<std::string> input_types;    // grammar symbol per input arg
    std::vector<ClauseFacts> facts;
    bool exclusive = false;
    bool excl_leading = false;
};

std::vector<std::string> term_vars(const TermPtr& t) {
    std::vector<std::string> vs;
    collect_vars(t, vs);
    return vs;
}

ClauseFacts scan_clause(const Clause& cl, const PredData& pd,
                        const std::map<std::string, const EntryDecl*>& entries,
                        const std::set<std::string>& defined) {
    ClauseFacts f;
    f.regions.assign(pd.input_args.size(), Region{});

    // Head argument variable names and the prefix pattern for each.
    std::map<std::string, size_t> head_var_input;  // var -> index into input_args
    std::set<std::string> bound;
    for (size_t i = 0; i < pd.input_args.size(); ++i) {
        const TermPtr& a = cl.head->args[pd.input_args[i]];
        if (a->kind == Term::Kind::Var) {
            head_var_input[a->name] = i;
            bound.insert(a->name);
        }
    }

    std::map<std::string, IvSet> guards;       // head input var -> numeric region
    std::map<std::string, IvSet> lead_guards;  // the subset seen while leading
    // Selection covers head unification plus the unbroken run of comparisons
    // after it; the first other literal commits the clause.
    bool leading = true;

    for (size_t li = 0; li < cl.body.size(); ++li) {
        const TermPtr& t = cl.body[li].atom;
        bool in_prefix = static_cast<int>(li) < cl.head_prefix;
        if (t->name == "=" && t->args.size() == 2) {
            if (!in_prefix) leading = false;
            const TermPtr& lhs = t->args[0];
            const TermPtr& rhs = t->args[1];
            if (in_prefix && lhs->kind == Term::Kind::Var) {
                auto hit = head_var_input.find(lhs->name);
                if (rhs->kind == Term::Kind::Var) {
                    // Aliased head arguments: a test when both sides are
                    // already bound inputs.
                    if (bound.count(lhs->name) && bound.count(rhs->name))
                        f.safe = false;
                    bound.insert(lhs->name);
                    bound.insert(rhs->name);
                } else {
                    if (hit != head_var_input.end()) {
                        Region& r = f.regions[hit->second];
                        if (rhs->kind == Term::Kind::Int) {
                            r.k = Region::K::Num;
                            Interval p;
                            p.lo_inf = p.hi_inf = false;
                            p.lo = p.hi = Rat(rhs->value);
                            r.ivs = {p};
                        } else {
                            r.k = Region::K::Ctor;
                            r.tag = ctor_tag(rhs);
                            for (const auto& sub : rhs->args)
                                if (sub->kind != Term::Kind::Var) r.partial = true;
                            r.len_known =
                                spine_stats(rhs, r.len_lo, r.len_hi_inf, r.len_hi);
                        }
                    }
                    bound.insert(lhs->name);
                    for (const auto& v : term_vars(rhs)) bound.insert(v);
                }
                continue;
            }
            // General unification: safe only when one side is a free variable.
            if (lhs->kind == Term::Kind::Var && !bound.count(lhs->name)) {
                bound.insert(lhs->name);
                continue;
            }
            if (rhs->kind == Term::Kind::Var && !bound.count(rhs->name)) {
                bound.insert(rhs->name);
                continue;
            }
            f.safe = false;
            for (const auto& v : term_vars(t)) bound.insert(v);
            continue;
        }
        if (t->name == "is" && t->args.size() == 2) {
            leading = false;
            const TermPtr& x = t->args[0];
            bool rhs_ok = true;
            for (const auto& v : term_vars(t->args[1]))
                if (!bound.count(v)) rhs_ok = false;
            if (rhs_ok && x->kind == Term::Kind::Var && !bound.count(x->name))
                bound.insert(x->name);
            else
                f.safe = false;
            continue;
        }
        if (is_comparison(t->name) && t->args.size() == 2) {
            const TermPtr& a = t->args[0];
            const TermPtr& b = t->args[1];
            if (a->kind == Term::Kind::Int && b->kind == Term::Kind::Int) {
                // Statically decided.
                IvSet s = guard_ivs(t->name, Rat(b->value));
                if (!ivs_contain(s, Rat(a->value))) f.possible = false;
                continue;
            }
            std::string var, op = t->name;
            std::optional<Rat> k;
            if (a->kind == Term::Kind::Var && b->kind == Term::Kind::Int) {
                var = a->name;
                k = Rat(b->value);
            } else if (a->kind == Term::Kind::Int && b->kind == Term::Kind::Var) {
                var = b->name;
                k = Rat(a->value);
                op = flip_op(op);
            }
            if (!k || !bound.count(var) || !head_var_input.count(var)) {
                f.safe = false;  // two-variable or derived-variable test
                continue;
            }
            auto it = guards.find(var);
            IvSet cur = it == guards.end() ? iv_full() : it->second;
            guards[var] = ivs_intersect(cur, guard_ivs(op, *k));
            if (guards[var].empty()) f.possible = false;
            continue;
        }
        // User predicate call.
        std::string key = pred_key(t->name, t->args.size());
        f.callees.push_back(key);  // unknown callees keep the pessimistic default
        if (!defined.count(key)) {
            f.safe = false;
            continue;
        }
        auto eit = entries.find(key);
        if (eit == entries.end() || eit->second->args.size() != t->args.size()) {
            f.safe = false;
            continue;
        }
        const EntryDecl& e = *eit->second;
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (e.args[i].mode == Mode::In) {
                for (const auto& v : term_vars(t->args[i]))
                    if (!bound.count(v)) f.safe = false;
            }
        }
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (e.args[i].mode == Mode::Out) {
                if (t->args[i]->kind == Term::Kind::Var)
                    bound.insert(t->args[i]->name);
                else
                    f.safe = false;  // output matched against a pattern
            }
        }
    }

    // Fold guard intervals into variable-pattern regions.
    for (const auto& [v, s] : guards) {
        size_t idx = head_var_input.at(v);
        Region& r = f.regions[idx];
        if (r.k == Region::K::Any) {
            r.k = Region::K::Num;
            r.ivs = s;
        } else if (r.k == Region::K::Num) {
            r.ivs = ivs_intersect(r.ivs, s);
            if (r.ivs.empty()) f.possible = false;
        }
    }
    return f;
}

// ----- cover cells -----------------------------------------------------------

struct Cell {
    enum class K { Tag, Base, Point, Open } k;
    std::string tag;
    Rat a, b;  // Point: a ; Open: (a,b)
    bool a_inf = false, b_inf = false;
};

bool region_matches(const Region& r, const Cell& c) {
    switch (r.k) {
        case Region::K::Any:
            return true;
        case Region::K::Ctor:
            return c.k == Cell::K::Tag && c.tag == r.tag && !r.partial;
        case Region::K::Num:
            if (c.k == Cell::K::Point) return ivs_contain(r.ivs, c.a);
            if (c.k == Cell::K::Open)
                return ivs_cover_open(r.ivs, c.a_inf, c.a, c.b_inf, c.b);
            return false;
    }
    return false;
}

std::vector<Cell> cells_for_arg(const PredData& pd, size_t idx, const TypeGrammar& g) {
    const std::string& sym = pd.input_types[idx];
    std::vector<Cell> cells;
    if (TypeGrammar::is_base(sym)) {
        bool is_nat = sym == "nat";
        std::set<Rat> bounds;
        if (is_nat) bounds.insert(Rat(0));
        for (const auto& f : pd.facts) {
            if (!f.possible) continue;
            const Region& r = f.regions[idx];
            if (r.k != Region::K::Num) continue;
            for (const auto& v : r.ivs) {
                if (!v.lo_inf) bounds.insert(v.lo);
                if (!v.hi_inf) bounds.insert(v.hi);
            }
        }
        std::vector<Rat> bs(bounds.begin(), bounds.end());
        auto keep = [&](const Cell& c) {
            if (!is_nat) return true;
            if (c.k == Cell::K::Point) return !(c.a < Rat(0));
            if (c.b_inf) return true;
            // integral domain: the open interval must contain an integer >= 0
            long long fl = 0;
            if (!c.a_inf) {
                fl = c.a.num / c.a.den;
                if (c.a.num % c.a.den != 0 && c.a.num < 0) --fl;
                ++fl;
                if (fl < 0) fl = 0;
            }
            return Rat(fl) < c.b;
        };
        Cell first{Cell::K::Open, "", Rat(0), Rat(0), true, true};
        if (!bs.empty()) {
            first.b = bs.front();
            first.b_inf = false;
        }
        if (keep(first)) cells.push_back(first);
        for (size_t i = 0; i < bs.size(); ++i) {
            Cell pt{Cell::K::Point, "", bs[i], Rat(0), false, false};
            if (keep(pt)) cells.push_back(pt);
            Cell open{Cell::K::Open, "", bs[i], Rat(0), false, true};
            if (i + 1 < bs.size()) {
                open.b = bs[i + 1];
                open.b_inf = false;
            }
            if (keep(open)) cells.push_back(open);
        }
        return cells;
    }
    auto it = g.rules.find(sym);
    if (it == g.rules.end()) return cells;
    for (const auto& alt : it->second) {
        if (alt->kind == Term::Kind::Int) {
            cells.push_back(Cell{Cell::K::Point, "", Rat(alt->value), Rat(0), false, false});
        } else if (alt->kind == Term::Kind::Comp) {
            LeafKind lk = leaf_kind(alt->name, g);
            if (lk == LeafKind::Base || (alt->args.empty() && lk == LeafKind::Symbol))
                cells.push_back(Cell{Cell::K::Base, "", Rat(0), Rat(0), false, false});
            else
                cells.push_back(Cell{Cell::K::Tag, ctor_tag(alt), Rat(0), Rat(0), false, false});
        }
    }
    return cells;
}

// ----- predicate-level checks -------------------------------------------------

bool compute_exclusive(const PredData& pd) {
    std::vector<size_t> live;
    for (size_t i = 0; i < pd.facts.size(); ++i)
        if (pd.facts[i].possible) live.push_back(i);
    if (live.size() <= 1) return true;
    for (size_t j = 0; j < pd.input_args.size(); ++j) {
        bool all = true;
        for (size_t x = 0; x < live.size() && all; ++x)
            for (size_t y = x + 1; y < live.size() && all; ++y)
                if (!regions_disjoint(pd.facts[live[x]].regions[j],
                                      pd.facts[live[y]].regions[j]))
                    all = false;
        if (all) return true;
    }
    return false;
}

bool compute_cover(const PredData& pd, const TypeGrammar& g,
                   const std::function<bool(const ClauseFacts&)>& usable) {
    std::vector<size_t> use;
    for (size_t i = 0; i < pd.facts.size(); ++i)
        if (pd.facts[i].possible && pd.facts[i].safe && usable(pd.facts[i]))
            use.push_back(i);
    if (use.empty()) return false;
    if (pd.input_args.empty()) return true;
    std::vector<std::vector<Cell>> cells;
    for (size_t j = 0; j < pd.input_args.size(); ++j) {
        cells.push_back(cells_for_arg(pd, j, g));
        if (cells.back().empty()) return false;
    }
    std::vector<size_t> pick(cells.size(), 0);
    while (true) {
        bool covered = false;
        for (size_t ci : use) {
            bool all = true;
            for (size_t j = 0; j < cells.size(); ++j)
                if (!region_matches(pd.facts[ci].regions[j], cells[j][pick[j]])) {
                    all = false;
                    break;
                }
            if (all) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
        size_t j = 0;
        while (j < pick.size() && ++pick[j] == cells[j].size()) pick[j++] = 0;
        if (j == pick.size()) break;
    }
    return true;
}

// ----- assembly ----------------------------------------------------------------

std::map<std::string, PredData> build_pred_data(const Program& p, TypeGrammar& g,
                                                std::vector<std::string>& diags) {
    std::map<std::string, PredData> pds;
    std::map<std::string, const EntryDecl*> entries;
    for (const auto& e : p.entries) {
        std::string key = pred_key(e.pred, e.args.size());
        if (!entries.count(key)) entries[key] = &e;
    }
    std::set<std::string> defined;
    for (const auto& c : p.clauses)
        defined.insert(pred_key(c.head->name, c.head->args.size()));

    for (const auto& c : p.clauses) {
        std::string key = pred_key(c.head->name, c.head->args.size());
        auto& pd = pds[key];
        pd.key = key;
        pd.clauses.push_back(&c);
    }
    for (auto& [key, pd] : pds) {
        auto eit = entries.find(key);
        if (eit == entries.end()) {
            diags.push_back("no entry declaration for " + key +
                            "; treated as failing and non-deterministic");
            continue;
        }
        pd.entry = eit->second;
        for (size_t i = 0; i < pd.entry->args.size(); ++i) {
            if (pd.entry->args[i].mode != Mode::In) continue;
            pd.input_args.push_back(i);
            std::vector<std::string> errs;
            pd.input_types.push_back(type_symbol_for(pd.entry->args[i].type, g, errs));
            for (auto& e : errs) diags.push_back(e);
        }
        for (const auto* cl : pd.clauses)
            pd.facts.push_back(scan_clause(*cl, pd, entries, defined));
        pd.exclusive = compute_exclusive(pd);
    }
    return pds;
}

}  // namespace

std::vector<std::vector<std::string>> call_sccs(const Program& p) {
    std::map<std::string, std::set<std::string>> edges;
    std::set<std::string> defined;
    for (const auto& c : p.clauses)
        defined.insert(pred_key(c.head->name, c.head->args.size()));
    for (const auto& c : p.clauses) {
        std::string from = pred_key(c.head->name, c.head->args.size());
        edges[from];
        for (const auto& lit : c.body) {
            if (is_builtin(lit.atom->name, lit.atom->args.size())) continue;
            std::string to = pred_key(lit.atom->name, lit.atom->args.size());
            if (defined.count(to)) edges[from].insert(to);
        }
    }
    // Tarjan; SCCs are emitted callees-first.
    std::vector<std::vector<std::string>> sccs;
    std::map<std::string, int> index, low;
    std::vector<std::string> stack;
    std::set<std::string> on_stack;
    int next = 0;
    std::function<void(const std::string&)> strong = [&](const std::string& v) {
        index[v] = low[v] = next++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : edges[v]) {
            if (!index.count(w)) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::string> scc;
            while (true) {
                std::string w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                scc.push_back(w);
                if (w == v) break;
            }
            sccs.push_back(std::move(scc));
        }
    };
    for (const auto& [v, es] : edges)
        if (!index.count(v)) strong(v);
    return sccs;
}

bool clauses_mutually_exclusive(const Program& p, TypeGrammar& g,
                                const std::string& pred_key_) {
    std::vector<std::string> diags;
    auto pds = build_pred_data(p, g, diags);
    auto it = pds.find(pred_key_);
    if (it == pds.end()) return false;
    return it->second.exclusive;
}

AuxResults analyze_aux(const Program& p, TypeGrammar& g,
                       std::vector<std::string>& diags) {
    AuxResults out;
    auto pds = build_pred_data(p, g, diags);
    std::map<std::string, const TrustDecl*> trusts;
    for (const auto& t : p.trusts) trusts[pred_key(t.pred, t.arity)] = &t;

    for (auto& [key, pd] : pds) {
        AuxInfo info;
        info.exclusive = pd.exclusive;
        out.preds[key] = info;
    }

    auto apply_trust = [&](const std::string& key, AuxInfo& info) {
        auto it = trusts.find(key);
        if (it == trusts.end()) return;
        if (it->second->not_fails) info.nf = NF::NotFails;
        if (it->second->is_det) info.det = Det::IsDet;
    };

    auto sccs = call_sccs(p);
    for (const auto& scc : sccs) {
        // Optimistic seed, monotone descent, bounded iteration.
        for (const auto& key : scc) {
            auto& info = out.preds[key];
            if (pds.count(key) && pds[key].entry) {
                info.nf = NF::NotFails;
                info.det = Det::IsDet;
            }
            apply_trust(key, info);
        }
        bool stable = false;
        for (size_t round = 0; round <= scc.size() && !stable; ++round) {
            stable = true;
            for (const auto& key : scc) {
                auto pit = pds.find(key);
                if (pit == pds.end() || !pit->second.entry) continue;
                PredData& pd = pit->second;
                auto callee_nf = [&](const ClauseFacts& f) {
                    for (const auto& c : f.callees)
                        if (out.get(c).nf != NF::NotFails) return false;
                    return true;
                };
                AuxInfo next = out.preds[key];
                next.nf = compute_cover(pd, g, callee_nf) ? NF::NotFails : NF::Fails;
                bool det_ok = pd.exclusive;
                for (const auto& f : pd.facts) {
                    if (!f.possible) continue;
                    for (const auto& c : f.callees)
                        if (out.get(c).det != Det::IsDet) det_ok = false;
                }
                next.det = det_ok ? Det::IsDet : Det::NonDet;
                apply_trust(key, next);
                if (next.nf != out.preds[key].nf || next.det != out.preds[key].det) {
                    stable = false;
                    out.preds[key] = next;
                }
            }
        }
        if (!stable) {
            for (const auto& key : scc) {
                auto& info = out.preds[key];
                info.nf = NF::Fails;
                info.det = Det::NonDet;
                apply_trust(key, info);
            }
            diags.push_back("non-failure/determinacy iteration did not settle for SCC around " +
                            scc.front());
        }
    }
    return out;
}

}  // namespace sra
