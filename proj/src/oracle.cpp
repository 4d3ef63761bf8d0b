#include "sra/oracle.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

#include "sra/frontend.hpp"
#include "sra/recurrence.hpp"
#include "sra/sizedtypes.hpp"
#include "sra/symexpr.hpp"

namespace sra {

namespace {

// ---------------------------------------------------------------------------
// Resolution machine

struct Diverged {
    std::string reason;
};

struct Goals {
    TermPtr lit;
    std::shared_ptr<const Goals> next;
};
using GoalsPtr = std::shared_ptr<const Goals>;

GoalsPtr cons_goal(TermPtr lit, GoalsPtr next) {
    return std::make_shared<const Goals>(Goals{std::move(lit), std::move(next)});
}

struct Machine {
    const std::vector<ResourceDef>& defs;
    const OracleLimits& lim;
    std::map<std::string, std::vector<const Clause*>> index;
    std::unordered_map<std::string, TermPtr> binds;
    std::vector<std::string> trail;
    long long steps = 0;
    long long rename_gen = 0;
    ConcreteMeasure out;

    Machine(const Program& p, const std::vector<ResourceDef>& d, const OracleLimits& l)
        : defs(d), lim(l) {
        for (const auto& c : p.clauses)
            index[pred_key(c.head->name, c.head->args.size())].push_back(&c);
        for (const auto& rd : defs) out.totals[rd.name] = Rat(0);
    }

    void tick() {
        if (++steps > lim.max_steps) throw Diverged{"step limit exceeded"};
    }

    TermPtr deref(TermPtr t) const {
        while (t->kind == Term::Kind::Var) {
            auto it = binds.find(t->name);
            if (it == binds.end()) return t;
            t = it->second;
        }
        return t;
    }

    void bind(const std::string& var, TermPtr t) {
        binds.emplace(var, std::move(t));
        trail.push_back(var);
    }

    size_t mark() const { return trail.size(); }

    void undo(size_t m) {
        while (trail.size() > m) {
            binds.erase(trail.back());
            trail.pop_back();
        }
    }

    bool unify(TermPtr a, TermPtr b) {
        a = deref(std::move(a));
        b = deref(std::move(b));
        if (a->kind == Term::Kind::Var) {
            if (b->kind == Term::Kind::Var && a->name == b->name) return true;
            bind(a->name, std::move(b));
            return true;
        }
        if (b->kind == Term::Kind::Var) {
            bind(b->name, std::move(a));
            return true;
        }
        if (a->kind == Term::Kind::Int)
            return b->kind == Term::Kind::Int && a->value == b->value;
        if (b->kind == Term::Kind::Int) return false;
        if (a->name != b->name || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!unify(a->args[i], b->args[i])) return false;
        return true;
    }

    TermPtr rename(const TermPtr& t, const std::string& suffix) {
        switch (t->kind) {
            case Term::Kind::Var: return mk_var(t->name + suffix);
            case Term::Kind::Int: return t;
            case Term::Kind::Comp: {
                if (t->args.empty()) return t;
                std::vector<TermPtr> as;
                as.reserve(t->args.size());
                for (const auto& a : t->args) as.push_back(rename(a, suffix));
                return mk_comp(t->name, std::move(as));
            }
        }
        return t;
    }

    std::optional<long long> eval_arith(const TermPtr& t0) {
        TermPtr t = deref(t0);
        if (t->kind == Term::Kind::Int) return t->value;
        if (t->kind != Term::Kind::Comp || t->args.size() != 2) return std::nullopt;
        auto l = eval_arith(t->args[0]);
        auto r = eval_arith(t->args[1]);
        if (!l || !r) return std::nullopt;
        if (t->name == "+") return *l + *r;
        if (t->name == "-") return *l - *r;
        if (t->name == "*") return *l * *r;
        return std::nullopt;
    }

    // Syntactic operator occurrences; variables contribute nothing even when
    // bound to structures (costs follow the program text, not the bindings).
    static void count_ops(const TermPtr& t, long long& add, long long& sub,
                          long long& mul) {
        if (t->kind != Term::Kind::Comp) return;
        if (t->args.size() == 2) {
            if (t->name == "+") ++add;
            if (t->name == "-") ++sub;
            if (t->name == "*") ++mul;
        }
        for (const auto& a : t->args) count_ops(a, add, sub, mul);
    }

    void charge_head() {
        for (const auto& rd : defs) out.totals[rd.name] = out.totals[rd.name] + rd.headcost;
    }

    void charge_lit() {
        for (const auto& rd : defs) out.totals[rd.name] = out.totals[rd.name] + rd.litcost;
    }

    void charge_ops(const TermPtr& t) {
        long long add = 0, sub = 0, mul = 0;
        count_ops(t, add, sub, mul);
        if (add == 0 && sub == 0 && mul == 0) return;
        for (const auto& rd : defs)
            out.totals[rd.name] = out.totals[rd.name] + rd.op_add * Rat(add) +
                                  rd.op_sub * Rat(sub) + rd.op_mul * Rat(mul);
    }

    bool eval_compare(const std::string& op, const TermPtr& a, const TermPtr& b) {
        auto l = eval_arith(a), r = eval_arith(b);
        if (!l || !r) return false;
        if (op == "<") return *l < *r;
        if (op == ">") return *l > *r;
        if (op == "=<") return *l <= *r;
        if (op == ">=") return *l >= *r;
        if (op == "=:=") return *l == *r;
        if (op == "=\\=") return *l != *r;
        return false;
    }

    void solve(const GoalsPtr& goals, int depth) {
        if (depth > lim.max_depth) throw Diverged{"depth limit exceeded"};
        if (!goals) {
            ++out.solutions;
            return;
        }
        const TermPtr lit = deref(goals->lit);
        const GoalsPtr rest = goals->next;
        const std::string& f = lit->name;
        size_t n = lit->args.size();
        tick();

        if (f == "=" && n == 2) {
            size_t m = mark();
            if (unify(lit->args[0], lit->args[1])) solve(rest, depth + 1);
            undo(m);
            return;
        }
        if (f == "is" && n == 2) {
            charge_ops(lit->args[1]);
            auto v = eval_arith(lit->args[1]);
            if (!v) return;
            size_t m = mark();
            if (unify(lit->args[0], mk_int(*v))) solve(rest, depth + 1);
            undo(m);
            return;
        }
        if (is_comparison(f) && n == 2) {
            charge_ops(lit);
            if (eval_compare(f, lit->args[0], lit->args[1])) solve(rest, depth + 1);
            return;
        }

        // User predicate call.
        charge_lit();
        auto it = index.find(pred_key(f, n));
        if (it == index.end()) return;  // no clauses: finite failure
        for (const Clause* c : it->second) {
            tick();
            std::string suffix = "@" + std::to_string(++rename_gen);
            size_t m = mark();
            TermPtr head = rename(c->head, suffix);
            if (!unify(head, lit)) {
                undo(m);
                continue;
            }
            // Atomic entry section: destructuring prefix, then the maximal
            // leading comparison run. Nothing is charged on rejection.
            bool entered = true;
            size_t bi = 0;
            std::vector<TermPtr> lead_cmp;
            for (; bi < c->body.size() && entered; ++bi) {
                if (bi < (size_t)c->head_prefix) {
                    TermPtr eq = rename(c->body[bi].atom, suffix);
                    if (eq->args.size() != 2 || !unify(eq->args[0], eq->args[1]))
                        entered = false;
                    continue;
                }
                const TermPtr& raw = c->body[bi].atom;
                if (!is_comparison(raw->name) || raw->args.size() != 2) break;
                TermPtr cmp = rename(raw, suffix);
                if (eval_compare(cmp->name, cmp->args[0], cmp->args[1]))
                    lead_cmp.push_back(cmp);
                else
                    entered = false;
            }
            if (!entered) {
                undo(m);
                continue;
            }
            charge_head();
            for (const TermPtr& cmp : lead_cmp) charge_ops(cmp);
            size_t consumed = (size_t)c->head_prefix + lead_cmp.size();
            GoalsPtr g = rest;
            for (size_t k = c->body.size(); k > consumed; --k)
                g = cons_goal(rename(c->body[k - 1].atom, suffix), g);
            solve(g, depth + 1);
            undo(m);
        }
    }
};

}  // namespace

ConcreteMeasure run_goal(const Program& p, const TermPtr& goal,
                         const std::vector<ResourceDef>& defs,
                         const OracleLimits& lim) {
    Machine mach(p, defs, lim);
    try {
        mach.solve(cons_goal(goal, nullptr), 0);
    } catch (const Diverged& d) {
        mach.out.valid = false;
        mach.out.divergence = d.reason;
    }
    return mach.out;
}

// ---------------------------------------------------------------------------
// Typed input generation

namespace {

bool is_type_ref(const std::string& name, const TypeGrammar& g) {
    return g.defined(name);
}

constexpr long long kNoMember = 1000000000000000LL;

// Recursive unfoldings needed to build a member through this alternative.
long long alt_cost(const TermPtr& alt, const TypeGrammar& g,
                   const std::map<std::string, long long>& need) {
    if (alt->kind == Term::Kind::Int) return 0;
    if (alt->kind != Term::Kind::Comp) return kNoMember;
    if (alt->args.empty()) {
        if (is_type_ref(alt->name, g)) {
            auto it = need.find(alt->name);
            return it == need.end() ? kNoMember : it->second;
        }
        return 0;
    }
    long long worst = 0;
    for (const auto& a : alt->args) worst = std::max(worst, alt_cost(a, g, need));
    return worst >= kNoMember ? kNoMember : worst + 1;
}

// Fewest recursive unfoldings needed to build a member of each symbol.
std::map<std::string, long long> min_need(const TypeGrammar& g) {
    std::map<std::string, long long> need;
    for (const auto& [s, _] : g.rules) need[s] = kNoMember;
    need["num"] = need["nat"] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [s, alts] : g.rules) {
            long long best = need[s];
            for (const auto& a : alts) best = std::min(best, alt_cost(a, g, need));
            if (best < need[s]) {
                need[s] = best;
                changed = true;
            }
        }
    }
    return need;
}

TermPtr gen(const std::string& symbol, const TypeGrammar& g,
            const std::map<std::string, long long>& need, long long remaining,
            long long leaf_budget, std::mt19937_64& rng);

TermPtr gen_alt(const TermPtr& alt, const TypeGrammar& g,
                const std::map<std::string, long long>& need, long long remaining,
                long long leaf_budget, std::mt19937_64& rng) {
    if (alt->kind == Term::Kind::Int) return alt;
    if (alt->args.empty()) {
        if (is_type_ref(alt->name, g))
            return gen(alt->name, g, need, remaining, leaf_budget, rng);
        return alt;  // plain constant
    }
    std::vector<TermPtr> as;
    as.reserve(alt->args.size());
    for (const auto& a : alt->args) {
        TermPtr sub = gen_alt(a, g, need, remaining - 1, leaf_budget, rng);
        if (!sub) return nullptr;
        as.push_back(sub);
    }
    return mk_comp(alt->name, std::move(as));
}

TermPtr gen(const std::string& symbol, const TypeGrammar& g,
            const std::map<std::string, long long>& need, long long remaining,
            long long leaf_budget, std::mt19937_64& rng) {
    if (symbol == "num" || symbol == "nat") {
        std::uniform_int_distribution<long long> d(0, std::max(0LL, leaf_budget));
        return mk_int(d(rng));
    }
    auto rit = g.rules.find(symbol);
    if (rit == g.rules.end()) return nullptr;
    std::vector<const TermPtr*> ok;
    for (const auto& a : rit->second)
        if (alt_cost(a, g, need) <= remaining) ok.push_back(&a);
    if (ok.empty()) return nullptr;
    std::uniform_int_distribution<size_t> pick(0, ok.size() - 1);
    return gen_alt(*ok[pick(rng)], g, need, remaining, leaf_budget, rng);
}

}  // namespace

TermPtr random_member(const std::string& symbol, const TypeGrammar& g,
                      long long budget, std::mt19937_64& rng) {
    auto need = min_need(g);
    return gen(symbol, g, need, budget, budget, rng);
}

std::vector<TermPtr> generate_inputs(const std::string& symbol,
                                     const TypeGrammar& g, long long budget,
                                     std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    auto need = min_need(g);
    std::vector<TermPtr> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(gen(symbol, g, need, budget, budget, rng));
    return out;
}

// ---------------------------------------------------------------------------
// Bound checking

std::map<std::string, Rat> measured_sizes(const AnalysisEntry& v,
                                          const std::vector<TermPtr>& inputs,
                                          const TypeGrammar& g) {
    std::map<std::string, Rat> asg;
    size_t base = 0;
    for (size_t j = 0; j < v.call_schemas.size(); ++j) {
        std::vector<SlotInfo> slots;
        schema_slots(v.call_schemas[j], slots);
        if (j < inputs.size() && inputs[j]) {
            SchemaPtr sized = size_of_term(inputs[j], v.call_schemas[j]->symbol, g);
            auto exprs = schema_slot_exprs(sized);
            for (size_t k = 0; k < slots.size() * 2 && k < exprs.size(); ++k) {
                if (!exprs[k]) continue;
                auto c = se_as_const(se_canon(*exprs[k]));
                if (c && base + k < v.inputs.size()) asg[v.inputs[base + k]] = *c;
            }
        }
        base += slots.size() * 2;
    }
    return asg;
}

namespace {

void check_pair(const AnalysisEntry& v, const std::map<std::string, Rat>& sizes,
                const std::string& what, const std::string& lo_slot,
                const std::string& hi_slot, const Rat& observed, Verdict& out) {
    auto lo = v.forms.find(lo_slot);
    if (lo != v.forms.end()) {
        auto val = evaluate(lo->second, sizes);
        if (val) {
            if (val->inf)
                out.violations.push_back(what + ": infinite lower bound");
            else if (observed < val->q)
                out.violations.push_back(what + ": observed " + observed.str() +
                                         " below lower bound " + val->q.str());
        }
    }
    auto hi = v.forms.find(hi_slot);
    if (hi != v.forms.end()) {
        auto val = evaluate(hi->second, sizes);
        if (val && !val->inf && val->q < observed)
            out.violations.push_back(what + ": observed " + observed.str() +
                                     " above upper bound " + val->q.str());
    }
}

}  // namespace

Verdict check_bounds(const ConcreteMeasure& m, const AnalysisEntry& v,
                     const std::map<std::string, Rat>& sizes,
                     const std::string& only) {
    Verdict out;
    if (!m.valid) {
        out.pass = false;
        out.violations.push_back("measure invalid: " + m.divergence);
        return out;
    }
    if (only.empty() || only == "solutions")
        check_pair(v, sizes, "solutions", slot_sol(true), slot_sol(false),
                   Rat(m.solutions), out);
    for (const auto& [name, total] : m.totals)
        if (only.empty() || only == name)
            check_pair(v, sizes, name, slot_res(name, true), slot_res(name, false),
                       total, out);
    out.pass = out.violations.empty();
    return out;
}

}  // namespace sra
