#include "sra/sizedtypes.hpp"

#include <algorithm>
#include <cassert>

namespace sra {

namespace {

struct Pos {
    std::string functor;
    int index;      // 1-based
    TermPtr leaf;   // base or symbol reference
};

void walk_alt_positions(const TermPtr& tt, const std::string& symbol,
                        const TypeGrammar& g, std::vector<Pos>& out) {
    if (tt->kind != Term::Kind::Comp || tt->args.empty()) return;
    for (size_t i = 0; i < tt->args.size(); ++i) {
        const TermPtr& a = tt->args[i];
        if (a->kind == Term::Kind::Comp && !a->args.empty()) {
            walk_alt_positions(a, symbol, g, out);
            continue;
        }
        if (!is_atom(a)) continue;
        if (a->name == symbol) continue;  // recursion spine
        LeafKind lk = leaf_kind(a->name, g);
        if (lk == LeafKind::Constructor) continue;
        out.push_back(Pos{tt->name, static_cast<int>(i) + 1, a});
    }
}

std::vector<Pos> enumerate_positions(const std::string& symbol, const TypeGrammar& g) {
    std::vector<Pos> out;
    auto it = g.rules.find(symbol);
    if (it == g.rules.end()) return out;
    for (const auto& alt : it->second) walk_alt_positions(alt, symbol, g, out);
    // Deduplicate by (functor, index), keeping the first occurrence.
    std::vector<Pos> uniq;
    for (const auto& p : out) {
        bool dup = false;
        for (const auto& q : uniq)
            if (q.functor == p.functor && q.index == p.index) dup = true;
        if (!dup) uniq.push_back(p);
    }
    return uniq;
}

SchemaPtr build_schema(const std::string& symbol, const TypeGrammar& g, FreshVars* fv,
                       bool vacuous) {
    auto node = std::make_shared<Schema>();
    node->symbol = symbol;
    node->vacuous = vacuous;
    if (TypeGrammar::is_base(symbol)) {
        node->k = Schema::K::Num;
        if (fv) {
            node->lo = se_var(fv->next());
            node->hi = se_var(fv->next());
        }
        return node;
    }
    bool rec = is_recursive_symbol(symbol, g);
    node->k = rec ? Schema::K::Rec : Schema::K::Plain;
    if (rec && fv) {
        node->lo = se_var(fv->next());
        node->hi = se_var(fv->next());
    }
    for (const auto& p : enumerate_positions(symbol, g))
        node->children.push_back(
            Schema::Child{p.functor, p.index, build_schema(p.leaf->name, g, fv, vacuous)});
    return node;
}

}  // namespace

SchemaPtr sized_schema(const std::string& symbol, const TypeGrammar& g, FreshVars& fv) {
    return build_schema(symbol, g, &fv, false);
}

SchemaPtr schema_nob(const std::string& symbol, const TypeGrammar& g) {
    return build_schema(symbol, g, nullptr, false);
}

// ---------------------------------------------------------------------------

static void relate_walk(const SchemaPtr& a, const SchemaPtr& b,
                        std::vector<SizeConstraint>& out) {
    if (!a || !b || a->k != b->k) return;
    if (a->lo && (*a->lo)->kind == SymExpr::Kind::Var && b->lo)
        out.push_back(SizeConstraint{(*a->lo)->name, true, *b->lo});
    if (a->hi && (*a->hi)->kind == SymExpr::Kind::Var && b->hi)
        out.push_back(SizeConstraint{(*a->hi)->name, false, *b->hi});
    size_t n = std::min(a->children.size(), b->children.size());
    for (size_t i = 0; i < n; ++i) relate_walk(a->children[i].sub, b->children[i].sub, out);
}

std::vector<SizeConstraint> relate(const SchemaPtr& a, const SchemaPtr& b) {
    std::vector<SizeConstraint> out;
    relate_walk(a, b, out);
    return out;
}

std::string domcon_str(const DomCon& d) {
    switch (d.rel) {
        case DomCon::Rel::Eq:
            return d.var + "=" + d.k.str();
        case DomCon::Rel::Gt:
            return d.var + ">" + d.k.str();
        case DomCon::Rel::Ge:
            return d.var + ">=" + d.k.str();
    }
    return d.var;
}

// ---------------------------------------------------------------------------
// Head patterns

namespace {

struct PatternMatcher {
    const TypeGrammar& g;
    PatternResult res;
    std::set<std::string> seen;  // pattern variables bound so far

    void fail(const std::string& msg) {
        if (res.ok) {
            res.ok = false;
            res.error = msg;
        }
    }

    // Emits `slot REL k`; slot expressions of the form var+c (decremented
    // spine bounds) are solved for the variable. Returns false when the
    // relation cannot be expressed over a single bound variable.
    bool emit(const std::optional<SEP>& slot, DomCon::Rel rel, const Rat& k) {
        if (!slot) return false;
        SEP c = se_canon(*slot);
        if (c->kind == SymExpr::Kind::Var) {
            res.dom.push_back(DomCon{c->name, rel, k});
            return true;
        }
        if (c->kind == SymExpr::Kind::Add && c->kids.size() == 2) {
            const SEP &a = c->kids[0], &b = c->kids[1];
            const SEP* v = nullptr;
            Rat off;
            if (a->kind == SymExpr::Kind::Var && b->kind == SymExpr::Kind::Const) {
                v = &a;
                off = b->c;
            } else if (b->kind == SymExpr::Kind::Var && a->kind == SymExpr::Kind::Const) {
                v = &b;
                off = a->c;
            }
            if (v) {
                res.dom.push_back(DomCon{(*v)->name, rel, k - off});
                return true;
            }
        }
        return false;
    }

    static SchemaPtr decrement(const SchemaPtr& s) {
        auto n = std::make_shared<Schema>(*s);
        if (n->lo) n->lo = se_sub(*n->lo, se_int(1));
        if (n->hi) n->hi = se_sub(*n->hi, se_int(1));
        return n;
    }

    static SchemaPtr find_child(const SchemaPtr& s, const std::string& functor, int index) {
        for (const auto& c : s->children)
            if (c.functor == functor && c.index == index) return c.sub;
        return nullptr;
    }

    void bind(const std::string& var, const SchemaPtr& s) {
        if (!s) return;
        if (!seen.insert(var).second) res.uncaptured = true;  // nonlinear pattern
        res.binds.emplace_back(var, s);
    }

    size_t alt_count(const std::string& sym) const {
        auto it = g.rules.find(sym);
        return it == g.rules.end() ? 0 : it->second.size();
    }

    // `exact`: the current subterm is uniquely determined by the argument
    // (the top, recursion-spine tails, and one-shot children of non-recursive
    // nodes), so its schema bounds describe it exactly and constraining them
    // is sound. Inexact positions (children aggregated over a spine) never
    // constrain the domain; restricting matches there set `uncaptured`.
    void match(const TermPtr& pat, const SchemaPtr& sch, int depth, bool exact) {
        if (!res.ok || !sch) return;
        if (pat->kind == Term::Kind::Var) {
            bind(pat->name, sch);
            return;
        }
        switch (sch->k) {
            case Schema::K::Num: {
                if (pat->kind == Term::Kind::Int) {
                    if (exact) {
                        bool cap = emit(sch->lo, DomCon::Rel::Eq, Rat(pat->value));
                        cap = emit(sch->hi, DomCon::Rel::Eq, Rat(pat->value)) && cap;
                        if (!cap) res.uncaptured = true;
                    } else {
                        res.uncaptured = true;
                    }
                    if (sch->symbol == "nat" && pat->value < 0)
                        fail("negative constant against nat");
                    return;
                }
                fail("pattern " + term_str(pat) + " against numeric type");
                return;
            }
            case Schema::K::Rec:
            case Schema::K::Plain: {
                const TermPtr* alt = matching_alt(pat, sch->symbol, g);
                if (!alt) {
                    fail("pattern " + term_str(pat) + " does not match type '" +
                         sch->symbol + "'");
                    return;
                }
                bool rec = alt_is_recursive(*alt, sch->symbol);
                bool restricting = alt_count(sch->symbol) > 1;
                if (sch->k == Schema::K::Rec) {
                    if (exact) {
                        bool cap = emit(sch->lo, rec ? DomCon::Rel::Gt : DomCon::Rel::Eq,
                                        Rat(0));
                        cap = emit(sch->hi, rec ? DomCon::Rel::Gt : DomCon::Rel::Eq,
                                   Rat(0)) &&
                              cap;
                        if (!cap && restricting) res.uncaptured = true;
                    } else if (restricting) {
                        res.uncaptured = true;
                    }
                } else if (restricting) {
                    res.uncaptured = true;  // no size slot can express the choice
                }
                SchemaPtr dec = rec ? decrement(sch) : sch;
                walk(*alt, pat, sch, dec, depth, exact);
                return;
            }
        }
    }

    // Walks a type-term alternative and the pattern in lockstep.
    void walk(const TermPtr& tt, const TermPtr& pat, const SchemaPtr& sch,
              const SchemaPtr& dec, int depth, bool exact) {
        if (!res.ok) return;
        if (tt->kind == Term::Kind::Int || is_atom(tt)) return;  // shape checked already
        if (pat->kind != Term::Kind::Comp || pat->name != tt->name ||
            pat->args.size() != tt->args.size()) {
            fail("pattern " + term_str(pat) + " does not fit type shape " + term_str(tt));
            return;
        }
        for (size_t i = 0; i < tt->args.size(); ++i) {
            const TermPtr& ta = tt->args[i];
            const TermPtr& pa = pat->args[i];
            if (ta->kind == Term::Kind::Int) {
                if (pa->kind == Term::Kind::Var) {
                    auto n = std::make_shared<Schema>();
                    n->k = Schema::K::Num;
                    n->symbol = "num";
                    n->lo = se_int(ta->value);
                    n->hi = se_int(ta->value);
                    bind(pa->name, n);
                } else if (!(pa->kind == Term::Kind::Int && pa->value == ta->value)) {
                    fail("pattern " + term_str(pa) + " against constant " + term_str(ta));
                }
                continue;
            }
            if (is_atom(ta)) {
                if (ta->name == sch->symbol) {  // recursion spine
                    match(pa, dec, depth + 1, exact);
                    continue;
                }
                LeafKind lk = leaf_kind(ta->name, g);
                if (lk == LeafKind::Constructor) {
                    if (pa->kind == Term::Kind::Var) {
                        auto n = std::make_shared<Schema>();
                        n->k = Schema::K::Plain;
                        n->symbol = ta->name;
                        bind(pa->name, n);
                    } else if (!(is_atom(pa) && pa->name == ta->name)) {
                        fail("pattern " + term_str(pa) + " against constructor " + ta->name);
                    }
                    continue;
                }
                SchemaPtr child = find_child(sch, tt->name, static_cast<int>(i) + 1);
                // Children of a recursive node recur across the spine: their
                // slots aggregate many subterms and stay unconstrained.
                match(pa, child, depth + 1, exact && sch->k != Schema::K::Rec);
                continue;
            }
            // Nested compound type term.
            if (pa->kind == Term::Kind::Var) continue;  // composite view: no binding
            walk(ta, pa, sch, dec, depth, exact);
        }
    }
};

}  // namespace

PatternResult head_pattern_constraints(const TermPtr& pattern, const SchemaPtr& schema,
                                       const TypeGrammar& g) {
    PatternMatcher m{g, {}, {}};
    m.match(pattern, schema, 0, true);
    return std::move(m.res);
}

// ---------------------------------------------------------------------------
// Concrete measurement

namespace {

using PosKey = std::pair<std::string, int>;

long long gather(const TermPtr& t, const std::string& symbol, const TypeGrammar& g,
                 std::map<PosKey, std::vector<TermPtr>>& sets);

void gather_walk(const TermPtr& tt, const TermPtr& t, const std::string& symbol,
                 const TypeGrammar& g, std::map<PosKey, std::vector<TermPtr>>& sets,
                 long long& count) {
    if (tt->kind != Term::Kind::Comp || tt->args.empty()) return;
    for (size_t i = 0; i < tt->args.size() && i < t->args.size(); ++i) {
        const TermPtr& ta = tt->args[i];
        const TermPtr& sub = t->args[i];
        if (ta->kind == Term::Kind::Comp && !ta->args.empty()) {
            gather_walk(ta, sub, symbol, g, sets, count);
            continue;
        }
        if (!is_atom(ta)) continue;
        if (ta->name == symbol) {
            count += gather(sub, symbol, g, sets);
            continue;
        }
        if (leaf_kind(ta->name, g) == LeafKind::Constructor) continue;
        sets[{tt->name, static_cast<int>(i) + 1}].push_back(sub);
    }
}

long long gather(const TermPtr& t, const std::string& symbol, const TypeGrammar& g,
                 std::map<PosKey, std::vector<TermPtr>>& sets) {
    const TermPtr* alt = matching_alt(t, symbol, g);
    if (!alt) return 0;
    long long count = alt_is_recursive(*alt, symbol) ? 1 : 0;
    gather_walk(*alt, t, symbol, g, sets, count);
    return count;
}

SchemaPtr measure(const std::string& symbol, const std::vector<TermPtr>& terms,
                  const TypeGrammar& g) {
    auto node = std::make_shared<Schema>();
    node->symbol = symbol;
    if (TypeGrammar::is_base(symbol)) {
        node->k = Schema::K::Num;
        if (terms.empty()) {
            node->vacuous = true;
            return node;
        }
        long long lo = terms[0]->value, hi = terms[0]->value;
        for (const auto& t : terms) {
            lo = std::min(lo, t->value);
            hi = std::max(hi, t->value);
        }
        node->lo = se_int(lo);
        node->hi = se_int(hi);
        return node;
    }
    bool rec = is_recursive_symbol(symbol, g);
    node->k = rec ? Schema::K::Rec : Schema::K::Plain;
    std::map<PosKey, std::vector<TermPtr>> sets;
    if (terms.empty()) {
        node->vacuous = true;
    } else {
        long long clo = 0, chi = 0;
        bool first = true;
        for (const auto& t : terms) {
            long long c = gather(t, symbol, g, sets);
            clo = first ? c : std::min(clo, c);
            chi = first ? c : std::max(chi, c);
            first = false;
        }
        if (rec) {
            node->lo = se_int(clo);
            node->hi = se_int(chi);
        }
    }
    for (const auto& p : enumerate_positions(symbol, g)) {
        auto it = sets.find({p.functor, p.index});
        static const std::vector<TermPtr> kNone;
        const auto& sub = it == sets.end() ? kNone : it->second;
        node->children.push_back(
            Schema::Child{p.functor, p.index, measure(p.leaf->name, sub, g)});
    }
    return node;
}

}  // namespace

SchemaPtr size_of_term(const TermPtr& t, const std::string& symbol, const TypeGrammar& g) {
    return measure(symbol, {t}, g);
}

// ---------------------------------------------------------------------------
// Symbolic composition of constructed terms

namespace {

SchemaPtr vacuous_schema(const std::string& symbol, const TypeGrammar& g) {
    return build_schema(symbol, g, nullptr, true);
}

std::optional<SEP> add_opt(const std::optional<SEP>& a, const std::optional<SEP>& b) {
    if (!a || !b) return std::nullopt;
    return se_add2(*a, *b);
}

}  // namespace

SchemaPtr compose_size(const TermPtr& t, const std::string& symbol, const TypeGrammar& g,
                       const std::map<std::string, SchemaPtr>& env) {
    if (TypeGrammar::is_base(symbol)) {
        auto node = std::make_shared<Schema>();
        node->k = Schema::K::Num;
        node->symbol = symbol;
        if (t->kind == Term::Kind::Int) {
            node->lo = se_int(t->value);
            node->hi = se_int(t->value);
            return node;
        }
        if (t->kind == Term::Kind::Var) {
            auto it = env.find(t->name);
            if (it != env.end() && it->second->k == Schema::K::Num) return it->second;
        }
        return node;  // no bounds
    }
    if (t->kind == Term::Kind::Var) {
        auto it = env.find(t->name);
        if (it != env.end() && it->second->symbol == symbol) return it->second;
        if (it != env.end() && it->second->k != Schema::K::Num &&
            it->second->children.size() == enumerate_positions(symbol, g).size())
            return it->second;  // structurally compatible
        return schema_nob(symbol, g);
    }
    const TermPtr* altp = matching_alt(t, symbol, g);
    if (!altp) return schema_nob(symbol, g);
    const TermPtr& alt = *altp;
    bool rec_alt = alt_is_recursive(alt, symbol);
    bool rec_sym = is_recursive_symbol(symbol, g);

    auto node = std::make_shared<Schema>();
    node->symbol = symbol;
    node->k = rec_sym ? Schema::K::Rec : Schema::K::Plain;
    std::optional<SEP> clo = se_int(rec_alt ? 1 : 0), chi = se_int(rec_alt ? 1 : 0);

    auto pos_list = enumerate_positions(symbol, g);
    std::vector<SchemaPtr> accum(pos_list.size());  // null = vacuous so far

    std::function<void(const TermPtr&, const TermPtr&)> walk = [&](const TermPtr& tt,
                                                                   const TermPtr& sub) {
        if (tt->kind != Term::Kind::Comp || tt->args.empty()) return;
        if (sub->kind != Term::Kind::Comp || sub->args.size() != tt->args.size()) {
            clo.reset();
            chi.reset();
            return;
        }
        for (size_t i = 0; i < tt->args.size(); ++i) {
            const TermPtr& ta = tt->args[i];
            const TermPtr& sa = sub->args[i];
            if (ta->kind == Term::Kind::Comp && !ta->args.empty()) {
                walk(ta, sa);
                continue;
            }
            if (!is_atom(ta)) continue;
            if (ta->name == symbol) {
                SchemaPtr tau = compose_size(sa, symbol, g, env);
                clo = add_opt(clo, tau->lo);
                chi = add_opt(chi, tau->hi);
                for (size_t ci = 0; ci < pos_list.size() && ci < tau->children.size(); ++ci)
                    accum[ci] = schema_join(accum[ci], tau->children[ci].sub);
                continue;
            }
            if (leaf_kind(ta->name, g) == LeafKind::Constructor) continue;
            SchemaPtr tau = compose_size(sa, ta->name, g, env);
            for (size_t ci = 0; ci < pos_list.size(); ++ci)
                if (pos_list[ci].functor == tt->name &&
                    pos_list[ci].index == static_cast<int>(i) + 1)
                    accum[ci] = schema_join(accum[ci], tau);
        }
    };
    walk(alt, t);

    if (rec_sym) {
        node->lo = clo;
        node->hi = chi;
    }
    for (size_t ci = 0; ci < pos_list.size(); ++ci)
        node->children.push_back(Schema::Child{
            pos_list[ci].functor, pos_list[ci].index,
            accum[ci] ? accum[ci] : vacuous_schema(pos_list[ci].leaf->name, g)});
    return node;
}

// ---------------------------------------------------------------------------
// Structure helpers

static void slots_walk(const SchemaPtr& s, int rec_depth, std::vector<SlotInfo>& out) {
    if (!s) return;
    if (s->k == Schema::K::Rec) {
        out.push_back(SlotInfo{false, false, rec_depth + 1, s->lo, s->hi});
        for (const auto& c : s->children) slots_walk(c.sub, rec_depth + 1, out);
        return;
    }
    if (s->k == Schema::K::Num) {
        out.push_back(SlotInfo{true, s->symbol == "nat", rec_depth + 1, s->lo, s->hi});
        return;
    }
    for (const auto& c : s->children) slots_walk(c.sub, rec_depth, out);
}

void schema_slots(const SchemaPtr& s, std::vector<SlotInfo>& out) {
    slots_walk(s, 0, out);
}

void bind_schema_vars(const SchemaPtr& a, const SchemaPtr& b,
                      std::map<std::string, SEP>& env) {
    if (!a || !b) return;
    if (a->lo && (*a->lo)->kind == SymExpr::Kind::Var && b->lo)
        env[(*a->lo)->name] = *b->lo;
    if (a->hi && (*a->hi)->kind == SymExpr::Kind::Var && b->hi)
        env[(*a->hi)->name] = *b->hi;
    size_t n = std::min(a->children.size(), b->children.size());
    for (size_t i = 0; i < n; ++i) bind_schema_vars(a->children[i].sub, b->children[i].sub, env);
}

SchemaPtr schema_map(const SchemaPtr& s,
                     const std::function<std::optional<SEP>(const SEP&, bool)>& f) {
    if (!s) return s;
    auto n = std::make_shared<Schema>(*s);
    if (n->lo) n->lo = f(*n->lo, true);
    if (n->hi) n->hi = f(*n->hi, false);
    for (auto& c : n->children) c.sub = schema_map(c.sub, f);
    return n;
}

SchemaPtr schema_subst(const SchemaPtr& s, const std::map<std::string, SEP>& env) {
    return schema_map(s, [&](const SEP& e, bool) -> std::optional<SEP> {
        return se_subst(e, env);
    });
}

SchemaPtr schema_join(const SchemaPtr& a, const SchemaPtr& b) {
    if (!a) return b;
    if (!b) return a;
    if (a->vacuous) return b;
    if (b->vacuous) return a;
    auto n = std::make_shared<Schema>(*a);
    n->vacuous = false;
    n->lo = (a->lo && b->lo) ? std::optional<SEP>(se_min({*a->lo, *b->lo})) : std::nullopt;
    n->hi = (a->hi && b->hi) ? std::optional<SEP>(se_max({*a->hi, *b->hi})) : std::nullopt;
    size_t cn = std::min(a->children.size(), b->children.size());
    for (size_t i = 0; i < cn; ++i)
        n->children[i].sub = schema_join(a->children[i].sub, b->children[i].sub);
    return n;
}

bool schema_equal(const SchemaPtr& a, const SchemaPtr& b) {
    if (!a || !b) return a == b;
    if (a->k != b->k || a->symbol != b->symbol || a->vacuous != b->vacuous) return false;
    auto slot_eq = [](const std::optional<SEP>& x, const std::optional<SEP>& y) {
        if (x.has_value() != y.has_value()) return false;
        return !x || se_equal(se_canon(*x), se_canon(*y));
    };
    if (!slot_eq(a->lo, b->lo) || !slot_eq(a->hi, b->hi)) return false;
    if (a->children.size() != b->children.size()) return false;
    for (size_t i = 0; i < a->children.size(); ++i)
        if (!schema_equal(a->children[i].sub, b->children[i].sub)) return false;
    return true;
}

std::string schema_str(const SchemaPtr& s) {
    if (!s) return "?";
    std::string out = s->symbol;
    if (s->k != Schema::K::Plain) {
        if (!s->lo && !s->hi) {
            out += "^nob";
        } else {
            out += "^(" + (s->lo ? se_str(*s->lo) : "nob") + "," +
                   (s->hi ? se_str(*s->hi) : "nob") + ")";
        }
    }
    if (!s->children.empty()) {
        out += "(";
        for (size_t i = 0; i < s->children.size(); ++i) {
            if (i) out += ",";
            out += schema_str(s->children[i].sub);
        }
        out += ")";
    }
    return out;
}

}  // namespace sra
