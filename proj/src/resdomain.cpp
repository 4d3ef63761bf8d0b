#include "sra/resdomain.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sra/frontend.hpp"

namespace sra {

namespace {

std::vector<std::string> d_strs(const std::vector<DomCon>& d) {
    std::vector<std::string> out;
    out.reserve(d.size());
    for (const auto& c : d) out.push_back(domcon_str(c));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool dc_equal(const DomCon& a, const DomCon& b) {
    return a.var == b.var && a.rel == b.rel && a.k == b.k;
}

bool dc_in(const DomCon& c, const std::vector<DomCon>& d) {
    for (const auto& x : d)
        if (dc_equal(c, x)) return true;
    return false;
}

void dc_add(std::vector<DomCon>& d, const DomCon& c) {
    if (!dc_in(c, d)) d.push_back(c);
}

SEP fin(const Rat& q) { return se_const(q); }

}  // namespace

ResourceDef resource_from_decl(const ResourceDecl& d) {
    ResourceDef r;
    r.name = d.name;
    r.headcost = Rat(d.headcost);
    r.litcost = Rat(d.litcost);
    r.op_add = Rat(d.opcost_add);
    r.op_sub = Rat(d.opcost_sub);
    r.op_mul = Rat(d.opcost_mul);
    r.agg_ub_sum = d.agg_ub_sum;
    r.agg_lb_min = d.agg_lb_min;
    r.def_lo = Rat(d.default_lb);
    r.def_hi = Rat(d.default_ub);
    return r;
}

std::vector<ResourceDef> program_resources(const Program& p) {
    std::vector<ResourceDef> out;
    bool have_steps = false;
    for (const auto& rd : p.resources) {
        out.push_back(resource_from_decl(rd));
        if (rd.name == "steps") have_steps = true;
    }
    if (!have_steps) {
        ResourceDecl steps;
        steps.name = "steps";
        out.insert(out.begin(), resource_from_decl(steps));
    }
    return out;
}

std::string slot_sol(bool lower) { return lower ? "sL" : "sU"; }
std::string slot_res(const std::string& res, bool lower) {
    return "r:" + res + (lower ? ":L" : ":U");
}
std::string slot_out(size_t arg, size_t slot, bool lower) {
    return "o" + std::to_string(arg) + ":" + std::to_string(slot) + (lower ? ":L" : ":U");
}

// ---------------------------------------------------------------------------
// Formal slot variables

void build_formals(AnalysisEntry& ver, const std::vector<std::string>& in_symbols,
                   const TypeGrammar& g) {
    std::string stem;
    for (char ch : ver.version) stem += (isalnum((unsigned char)ch) ? ch : '_');
    ver.call_schemas.clear();
    ver.inputs.clear();
    ver.meta.clear();
    ver.lows.clear();
    for (size_t i = 0; i < in_symbols.size(); ++i) {
        FreshVars fv;
        fv.prefix = stem + "_a" + std::to_string(i) + "_";
        SchemaPtr s = sized_schema(in_symbols[i], g, fv);
        ver.call_schemas.push_back(s);
        std::vector<SlotInfo> slots;
        schema_slots(s, slots);
        for (size_t k = 0; k < slots.size(); ++k) {
            for (int side = 0; side < 2; ++side) {
                bool lower = side == 0;
                const auto& e = lower ? slots[k].lo : slots[k].hi;
                FormalMeta m;
                m.var = (*e)->name;
                m.arg = i;
                m.slot = k;
                m.lower = lower;
                m.is_num = slots[k].is_num;
                m.is_nat = slots[k].is_nat;
                m.depth = (size_t)slots[k].depth;
                ver.inputs.push_back(m.var);
                ver.meta.push_back(m);
                if (!slots[k].is_num || slots[k].is_nat) ver.lows[m.var] = Rat(0);
            }
        }
    }
}

std::vector<std::optional<SEP>> schema_slot_exprs(const SchemaPtr& s) {
    std::vector<std::optional<SEP>> out;
    if (!s) return out;
    std::vector<SlotInfo> slots;
    schema_slots(s, slots);
    for (const auto& sl : slots) {
        out.push_back(sl.lo);
        out.push_back(sl.hi);
    }
    return out;
}

namespace {

// Rebuilds a schema of `shape` with the given pre-order slot expressions.
SchemaPtr schema_from_exprs_impl(const SchemaPtr& shape,
                                 const std::vector<std::optional<SEP>>& exprs,
                                 size_t& pos) {
    if (!shape) return nullptr;
    Schema s;
    s.k = shape->k;
    s.symbol = shape->symbol;
    if (shape->k != Schema::K::Plain) {
        s.lo = pos < exprs.size() ? exprs[pos] : std::nullopt;
        s.hi = pos + 1 < exprs.size() ? exprs[pos + 1] : std::nullopt;
        pos += 2;
    }
    for (const auto& ch : shape->children) {
        Schema::Child c;
        c.functor = ch.functor;
        c.index = ch.index;
        c.sub = schema_from_exprs_impl(ch.sub, exprs, pos);
        s.children.push_back(std::move(c));
    }
    return std::make_shared<const Schema>(std::move(s));
}

}  // namespace

SchemaPtr schema_from_exprs(const SchemaPtr& shape,
                            const std::vector<std::optional<SEP>>& exprs) {
    size_t pos = 0;
    return schema_from_exprs_impl(shape, exprs, pos);
}

// ---------------------------------------------------------------------------
// Lattice operations

AbstractElement bottom(const std::vector<ResourceDef>& defs, Fresh& fresh) {
    AbstractElement e;
    e.bottom = true;
    e.failed = true;
    e.s_lo = fresh.next("s");
    e.s_hi = fresh.next("s");
    e.rels.push_back({e.s_lo, true, se_int(0), {}});
    e.rels.push_back({e.s_hi, false, se_inf(), {}});
    for (const auto& r : defs) {
        std::string lo = fresh.next("c"), hi = fresh.next("c");
        e.res[r.name] = {lo, hi};
        e.rels.push_back({lo, true, fin(r.def_lo), {}});
        e.rels.push_back({hi, false, fin(r.def_hi), {}});
    }
    return e;
}

namespace {

struct CanonRel {
    std::string var;
    bool lower;
    std::string expr;
    std::vector<std::string> guard;
};

struct CanonElem {
    std::vector<CanonRel> rels;
    std::vector<std::string> d;
};

CanonElem canon_element(const AbstractElement& e) {
    std::map<std::string, SEP> ren;
    std::map<std::string, std::string> names;
    auto alias = [&](const std::string& from, const std::string& to) {
        if (from.empty() || names.count(from)) return;
        names[from] = to;
        ren[from] = se_var(to);
    };
    alias(e.s_lo, "$sL");
    alias(e.s_hi, "$sU");
    for (const auto& [rn, pr] : e.res) {
        alias(pr.first, "$" + rn + ":L");
        alias(pr.second, "$" + rn + ":U");
    }
    int k = 0;
    for (const auto& r : e.rels) alias(r.var, "$t" + std::to_string(k++));
    CanonElem c;
    for (const auto& r : e.rels) {
        CanonRel cr;
        cr.var = names.count(r.var) ? names[r.var] : r.var;
        cr.lower = r.lower;
        cr.expr = se_str(se_canon(se_subst(r.expr, ren)));
        for (const auto& gcon : r.guard) cr.guard.push_back(domcon_str(gcon));
        std::sort(cr.guard.begin(), cr.guard.end());
        c.rels.push_back(std::move(cr));
    }
    c.d = d_strs(e.d);
    return c;
}

}  // namespace

bool leq(const AbstractElement& a, const AbstractElement& b) {
    if (a.bottom) return true;
    if (b.bottom) return false;
    if (a.nf == NF::NotFails && b.nf == NF::Fails) return false;
    if (a.det == Det::IsDet && b.det == Det::NonDet) return false;
    if (!a.failed && b.failed) return false;
    CanonElem ca = canon_element(a), cb = canon_element(b);
    // a's domain at least as constrained: every b constraint appears in a.
    for (const auto& s : cb.d)
        if (std::find(ca.d.begin(), ca.d.end(), s) == ca.d.end()) return false;
    // every a-relation present in b, with a guard already implied by a.
    for (const auto& ra : ca.rels) {
        std::set<std::string> have(ca.d.begin(), ca.d.end());
        have.insert(ra.guard.begin(), ra.guard.end());
        bool found = false;
        for (const auto& rb : cb.rels) {
            if (rb.var != ra.var || rb.lower != ra.lower || rb.expr != ra.expr) continue;
            bool ok = true;
            for (const auto& gs : rb.guard)
                if (!have.count(gs)) { ok = false; break; }
            if (ok) { found = true; break; }
        }
        if (!found) return false;
    }
    return true;
}

AbstractElement lub(const AbstractElement& a, const AbstractElement& b, Fresh& fresh) {
    if (a.bottom) return b;
    if (b.bottom) return a;
    if (leq(a, b)) return b;
    if (leq(b, a)) return a;
    AbstractElement out;
    out.version = a.version.empty() ? b.version : a.version;
    out.s_lo = a.s_lo;
    out.s_hi = a.s_hi;
    out.res = a.res;
    out.failed = a.failed && b.failed;
    out.nf = (a.nf == NF::NotFails || b.nf == NF::NotFails) ? NF::NotFails : NF::Fails;
    out.det = (a.det == Det::IsDet || b.det == Det::IsDet) ? Det::IsDet : Det::NonDet;

    // Rename b's bound variables: quantities onto a's, the rest apart.
    std::map<std::string, SEP> ren;
    auto alias = [&](const std::string& from, const std::string& to) {
        if (!from.empty() && from != to) ren[from] = se_var(to);
    };
    alias(b.s_lo, a.s_lo);
    alias(b.s_hi, a.s_hi);
    for (const auto& [rn, pr] : b.res) {
        auto it = a.res.find(rn);
        if (it == a.res.end()) { out.res[rn] = pr; continue; }
        alias(pr.first, it->second.first);
        alias(pr.second, it->second.second);
    }
    for (const auto& r : b.rels) {
        if (ren.count(r.var)) continue;
        bool quantity = r.var == b.s_lo || r.var == b.s_hi;
        for (const auto& [rn, pr] : b.res)
            quantity = quantity || r.var == pr.first || r.var == pr.second;
        if (!quantity) ren[r.var] = se_var(fresh.next("j"));
    }

    std::vector<DomCon> common, ares, bres;
    for (const auto& c : a.d)
        (dc_in(c, b.d) ? common : ares).push_back(c);
    for (const auto& c : b.d)
        if (!dc_in(c, a.d)) bres.push_back(c);
    out.d = common;

    for (const auto& r : a.rels) {
        Reln nr = r;
        for (const auto& c : ares) dc_add(nr.guard, c);
        out.rels.push_back(std::move(nr));
    }
    for (const auto& r : b.rels) {
        Reln nr;
        auto it = ren.find(r.var);
        nr.var = it != ren.end() ? (*it->second).name : r.var;
        nr.lower = r.lower;
        nr.expr = se_subst(r.expr, ren);
        nr.guard = r.guard;
        for (const auto& c : bres) dc_add(nr.guard, c);
        out.rels.push_back(std::move(nr));
    }

    for (const auto& [v, s] : a.env) {
        auto it = b.env.find(v);
        if (it == b.env.end()) continue;
        out.env[v] = schema_join(s, schema_subst(it->second, ren));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Clause entry

namespace {

// Substitutes pending constructions into a term (cycle-safe).
TermPtr resolve_term(const TermPtr& t, const std::map<std::string, TermPtr>& defs,
                     std::set<std::string>& seen) {
    if (!t) return t;
    if (t->kind == Term::Kind::Var) {
        auto it = defs.find(t->name);
        if (it == defs.end() || seen.count(t->name)) return t;
        seen.insert(t->name);
        TermPtr r = resolve_term(it->second, defs, seen);
        seen.erase(t->name);
        return r;
    }
    if (t->kind == Term::Kind::Comp) {
        std::vector<TermPtr> args;
        bool changed = false;
        for (const auto& a : t->args) {
            TermPtr r = resolve_term(a, defs, seen);
            changed = changed || r != a;
            args.push_back(r);
        }
        if (changed) return mk_comp(t->name, std::move(args));
    }
    return t;
}

TermPtr resolve_term(const TermPtr& t, const std::map<std::string, TermPtr>& defs) {
    std::set<std::string> seen;
    return resolve_term(t, defs, seen);
}

void destructure(ClauseState& st, const TermPtr& var_side, const TermPtr& pattern,
                 const TypeGrammar& g) {
    auto it = st.elem.env.find(var_side->name);
    if (it == st.elem.env.end()) return;
    PatternResult pr = head_pattern_constraints(pattern, it->second, g);
    if (!pr.ok) {
        st.applicable = false;
        st.error = pr.error;
        return;
    }
    if (pr.uncaptured) st.uncaptured = true;
    for (const auto& c : pr.dom) dc_add(st.elem.d, c);
    for (const auto& [v, s] : pr.binds)
        if (!st.elem.env.emplace(v, s).second) st.uncaptured = true;  // alias test
}

}  // namespace

ClauseState call_to_entry(const AnalysisEntry& ver, const Clause& clause,
                          const std::vector<ResourceDef>& defs, const TypeGrammar& g,
                          Fresh& fresh) {
    ClauseState st;
    st.head = clause.head;
    AbstractElement& e = st.elem;
    e.bottom = false;
    e.version = ver.version;
    e.failed = false;
    e.d = ver.call_d;
    e.s_lo = fresh.next("s");
    e.s_hi = fresh.next("s");
    e.rels.push_back({e.s_lo, true, se_int(1), {}});
    e.rels.push_back({e.s_hi, false, se_int(1), {}});
    for (const auto& r : defs) {
        std::string lo = fresh.next("c"), hi = fresh.next("c");
        e.res[r.name] = {lo, hi};
        e.rels.push_back({lo, true, fin(r.headcost), {}});
        e.rels.push_back({hi, false, fin(r.headcost), {}});
    }

    for (size_t i = 0; i < ver.input_args.size() && i < ver.call_schemas.size(); ++i) {
        const TermPtr& h = clause.head->args[ver.input_args[i]];
        if (h->kind == Term::Kind::Var) e.env[h->name] = ver.call_schemas[i];
    }
    for (size_t j = 0; j < ver.output_args.size(); ++j) {
        const TermPtr& h = clause.head->args[ver.output_args[j]];
        if (h->kind == Term::Kind::Var && j < ver.out_symbols.size())
            st.out_symbol[h->name] = ver.out_symbols[j];
    }

    // Head-selection prefix: patterns refine d and bind sub-schemas; output
    // patterns become pending constructions.
    for (int k = 0; k < clause.head_prefix && (size_t)k < clause.body.size(); ++k) {
        const TermPtr& a = clause.body[k].atom;
        if (a->name != "=" || a->args.size() != 2) continue;
        const TermPtr &lhs = a->args[0], &rhs = a->args[1];
        if (lhs->kind != Term::Kind::Var) continue;
        if (e.env.count(lhs->name)) {
            destructure(st, lhs, rhs, g);
            if (!st.applicable) return st;
        } else {
            st.defs[lhs->name] = rhs;
            if (rhs->kind == Term::Kind::Var && st.out_symbol.count(lhs->name))
                st.out_symbol.emplace(rhs->name, st.out_symbol[lhs->name]);
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// Extend

namespace {

struct NumBounds {
    std::optional<SEP> lo, hi;
};

void count_ops(const TermPtr& t, long long& add, long long& sub, long long& mul) {
    if (!t || t->kind != Term::Kind::Comp) return;
    if (t->args.size() == 2) {
        if (t->name == "+") ++add;
        if (t->name == "-") ++sub;
        if (t->name == "*") ++mul;
    }
    for (const auto& a : t->args) count_ops(a, add, sub, mul);
}

NumBounds arith_bounds(const TermPtr& t, const std::map<std::string, SchemaPtr>& env) {
    NumBounds nb;
    if (!t) return nb;
    if (t->kind == Term::Kind::Int) {
        nb.lo = se_int(t->value);
        nb.hi = se_int(t->value);
        return nb;
    }
    if (t->kind == Term::Kind::Var) {
        auto it = env.find(t->name);
        if (it != env.end() && it->second && it->second->k == Schema::K::Num) {
            nb.lo = it->second->lo;
            nb.hi = it->second->hi;
        }
        return nb;
    }
    if (t->args.size() != 2) return nb;
    NumBounds a = arith_bounds(t->args[0], env);
    NumBounds b = arith_bounds(t->args[1], env);
    if (t->name == "+") {
        if (a.lo && b.lo) nb.lo = se_add2(*a.lo, *b.lo);
        if (a.hi && b.hi) nb.hi = se_add2(*a.hi, *b.hi);
    } else if (t->name == "-") {
        if (a.lo && b.hi) nb.lo = se_sub(*a.lo, *b.hi);
        if (a.hi && b.lo) nb.hi = se_sub(*a.hi, *b.lo);
    } else if (t->name == "*") {
        auto scaled = [&](const Rat& c, const NumBounds& x) {
            NumBounds r;
            if (c < Rat(0)) {
                if (x.hi) r.lo = se_scale(c, *x.hi);
                if (x.lo) r.hi = se_scale(c, *x.lo);
            } else {
                if (x.lo) r.lo = se_scale(c, *x.lo);
                if (x.hi) r.hi = se_scale(c, *x.hi);
            }
            return r;
        };
        auto ca = a.lo && a.hi && se_equal(*a.lo, *a.hi) ? se_as_const(se_canon(*a.lo))
                                                         : std::nullopt;
        auto cb = b.lo && b.hi && se_equal(*b.lo, *b.hi) ? se_as_const(se_canon(*b.lo))
                                                         : std::nullopt;
        if (ca)
            nb = scaled(*ca, b);
        else if (cb)
            nb = scaled(*cb, a);
    }
    return nb;
}

// Appends the four bound-update relations for one literal.
// s_lam/r_lam: the literal's own solution and per-resource bounds.
void charge(ClauseState& st, const std::vector<ResourceDef>& defs, Fresh& fresh,
            const SEP& s_lam_lo, const SEP& s_lam_hi,
            const std::map<std::string, std::pair<SEP, SEP>>& r_lam, bool user_lit) {
    AbstractElement& e = st.elem;
    std::string nsl = fresh.next("s"), nsh = fresh.next("s");
    e.rels.push_back({nsh, false, se_mul2(se_var(e.s_hi), s_lam_hi), {}});
    if (e.failed)
        e.rels.push_back({nsl, true, se_int(0), {}});
    else
        e.rels.push_back({nsl, true, se_mul2(se_var(e.s_lo), s_lam_lo), {}});
    for (const auto& rd : defs) {
        auto& [lov, hiv] = e.res[rd.name];
        std::string nlo = fresh.next("c"), nhi = fresh.next("c");
        SEP lit_hi = user_lit ? fin(rd.litcost) : se_int(0);
        SEP lit_lo = lit_hi;
        auto it = r_lam.find(rd.name);
        if (it != r_lam.end()) {
            lit_lo = se_add2(lit_lo, it->second.first);
            lit_hi = se_add2(lit_hi, it->second.second);
        }
        e.rels.push_back({nhi, false, se_add2(se_var(hiv), se_mul2(se_var(e.s_hi), lit_hi)), {}});
        if (e.failed)
            e.rels.push_back({nlo, true, se_var(lov), {}});
        else
            e.rels.push_back({nlo, true, se_add2(se_var(lov), se_mul2(se_var(e.s_lo), lit_lo)), {}});
        lov = nlo;
        hiv = nhi;
    }
    e.s_lo = nsl;
    e.s_hi = nsh;
}

// Instantiates one solved slot of the callee at actual argument expressions.
// `deg` is the sound default when the callee is unknown or still seeding.
SEP instantiate(const LiteralSuccess& succ, const std::string& slot,
                const std::vector<SEP>& args, const std::set<size_t>& missing,
                bool lower, const SEP& deg) {
    auto degrade = [&]() -> SEP { return deg; };
    if (!succ.callee) return degrade();
    const AnalysisEntry& cal = *succ.callee;
    if (succ.same_scc) {
        std::vector<SEP> as = args;
        for (size_t i = 0; i < as.size(); ++i)
            if (missing.count(i)) as[i] = cal.meta[i].lower ? se_int(0) : se_inf();
        return se_call(cal.version, slot, std::move(as));
    }
    auto it = cal.forms.find(slot);
    if (it == cal.forms.end()) return degrade();
    if (!missing.empty()) {
        std::set<std::string> used;
        for (const auto& c : it->second.cases) {
            se_vars(c.expr, used);
            for (const auto& dcon : c.guard) used.insert(dcon.var);
        }
        for (size_t i : missing)
            if (i < cal.inputs.size() && used.count(cal.inputs[i])) return degrade();
    }
    return closed_form_apply(it->second, cal.inputs, args, lower);
}

}  // namespace

void zero_lower_bounds(ClauseState& st, const std::vector<ResourceDef>& defs,
                       Fresh& fresh) {
    AbstractElement& e = st.elem;
    e.failed = true;
    std::string nsl = fresh.next("s");
    e.rels.push_back({nsl, true, se_int(0), {}});
    e.s_lo = nsl;
    for (const auto& rd : defs) {
        auto it = e.res.find(rd.name);
        if (it == e.res.end()) continue;
        std::string nlo = fresh.next("c");
        e.rels.push_back({nlo, true, se_int(0), {}});
        it->second.first = nlo;
    }
}

void extend(ClauseState& st, const Literal& lit, const LiteralSuccess& succ,
            const std::vector<ResourceDef>& defs, const TypeGrammar& g, Fresh& fresh,
            bool freeze_on_compare) {
    if (!st.applicable) return;
    AbstractElement& e = st.elem;
    const TermPtr& a = lit.atom;
    const std::string& f = a->name;
    size_t n = a->args.size();

    if (f == "=" && n == 2) {
        st.leading = false;
        TermPtr lhs = a->args[0], rhs = a->args[1];
        bool lb = lhs->kind == Term::Kind::Var && e.env.count(lhs->name);
        bool rb = rhs->kind == Term::Kind::Var && e.env.count(rhs->name);
        if (lhs->kind == Term::Kind::Var && !lb && !rb) {
            st.defs[lhs->name] = rhs;
        } else if (rhs->kind == Term::Kind::Var && !rb && !lb) {
            st.defs[rhs->name] = lhs;
        } else if (lb && rhs->kind != Term::Kind::Var) {
            destructure(st, lhs, resolve_term(rhs, st.defs), g);
            if (freeze_on_compare) e.failed = true;
        } else if (rb && lhs->kind != Term::Kind::Var) {
            destructure(st, rhs, resolve_term(lhs, st.defs), g);
            if (freeze_on_compare) e.failed = true;
        }
        // aliasing of two bound variables: no size refinement
        return;
    }

    if (f == "is" && n == 2) {
        st.leading = false;
        long long add = 0, sub = 0, mul = 0;
        count_ops(a->args[1], add, sub, mul);
        NumBounds nb = arith_bounds(resolve_term(a->args[1], st.defs), e.env);
        if (a->args[0]->kind == Term::Kind::Var) {
            Schema s;
            s.k = Schema::K::Num;
            s.symbol = "num";
            s.lo = nb.lo;
            s.hi = nb.hi;
            e.env[a->args[0]->name] = std::make_shared<const Schema>(std::move(s));
        }
        std::map<std::string, std::pair<SEP, SEP>> cost;
        for (const auto& rd : defs) {
            Rat c = rd.op_add * Rat(add) + rd.op_sub * Rat(sub) + rd.op_mul * Rat(mul);
            if (!c.is_zero()) cost[rd.name] = {fin(c), fin(c)};
        }
        charge(st, defs, fresh, se_int(1), se_int(1), cost, false);
        return;
    }

    if (is_comparison(f) && n == 2) {
        long long add = 0, sub = 0, mul = 0;
        count_ops(a->args[0], add, sub, mul);
        count_ops(a->args[1], add, sub, mul);
        // single-variable guards refine the clause domain
        const TermPtr *v = nullptr, *k = nullptr;
        bool flipped = false;
        if (a->args[0]->kind == Term::Kind::Var && a->args[1]->kind == Term::Kind::Int) {
            v = &a->args[0];
            k = &a->args[1];
        } else if (a->args[1]->kind == Term::Kind::Var &&
                   a->args[0]->kind == Term::Kind::Int) {
            v = &a->args[1];
            k = &a->args[0];
            flipped = true;
        }
        bool absorbed = false;
        if (v) {
            auto it = e.env.find((*v)->name);
            if (it != e.env.end() && it->second && it->second->k == Schema::K::Num &&
                it->second->lo && it->second->hi &&
                (*it->second->lo)->kind == SymExpr::Kind::Var &&
                (*it->second->hi)->kind == SymExpr::Kind::Var) {
                std::string op = f;
                if (flipped) {
                    if (f == ">") op = "<";
                    else if (f == ">=") op = "=<";
                    else if (f == "<") op = ">";
                    else if (f == "=<") op = ">=";
                }
                std::optional<DomCon::Rel> rel;
                if (op == ">") rel = DomCon::Rel::Gt;
                else if (op == ">=") rel = DomCon::Rel::Ge;
                else if (op == "=:=") rel = DomCon::Rel::Eq;
                if (rel) {
                    dc_add(e.d, {(*it->second->lo)->name, *rel, Rat((*k)->value)});
                    dc_add(e.d, {(*it->second->hi)->name, *rel, Rat((*k)->value)});
                    absorbed = true;  // the case guard now entails this test
                }
            }
        }
        if (!absorbed && freeze_on_compare) {
            // A genuine failure point. Inside the leading guard run it
            // precedes the head charge (clause selection is atomic), so the
            // whole clause may cost nothing; later it merely freezes.
            if (st.leading)
                zero_lower_bounds(st, defs, fresh);
            else
                e.failed = true;
        }
        std::map<std::string, std::pair<SEP, SEP>> cost;
        for (const auto& rd : defs) {
            Rat c = rd.op_add * Rat(add) + rd.op_sub * Rat(sub) + rd.op_mul * Rat(mul);
            if (!c.is_zero()) cost[rd.name] = {fin(c), fin(c)};
        }
        charge(st, defs, fresh, se_int(1), se_int(1), cost, false);
        return;
    }

    // User predicate call.
    st.leading = false;
    if (succ.nf == NF::Fails) e.failed = true;

    std::vector<SEP> args;
    std::set<size_t> missing;
    if (succ.callee) {
        const AnalysisEntry& cal = *succ.callee;
        for (size_t j = 0; j < cal.input_args.size(); ++j) {
            size_t pos = cal.input_args[j];
            SchemaPtr as;
            if (pos < a->args.size()) {
                TermPtr t = resolve_term(a->args[pos], st.defs);
                as = compose_size(t, cal.call_schemas[j]->symbol, g, e.env);
            }
            auto exprs = schema_slot_exprs(as);
            std::vector<SlotInfo> slots;
            schema_slots(cal.call_schemas[j], slots);
            for (size_t k2 = 0; k2 < slots.size() * 2; ++k2) {
                if (k2 < exprs.size() && exprs[k2]) {
                    args.push_back(*exprs[k2]);
                } else {
                    missing.insert(args.size());
                    args.push_back(se_int(0));
                }
            }
        }
    }

    SEP slam_lo = instantiate(succ, slot_sol(true), args, missing, true, se_int(0));
    SEP slam_hi = instantiate(succ, slot_sol(false), args, missing, false, se_inf());
    std::map<std::string, std::pair<SEP, SEP>> rlam;
    for (const auto& rd : defs) {
        SEP lo = instantiate(succ, slot_res(rd.name, true), args, missing, true,
                             fin(rd.def_lo));
        SEP hi = instantiate(succ, slot_res(rd.name, false), args, missing, false,
                             fin(rd.def_hi));
        rlam[rd.name] = {lo, hi};
    }
    charge(st, defs, fresh, slam_lo, slam_hi, rlam, true);

    // Bind output arguments to the callee's solved output sizes.
    if (succ.callee) {
        const AnalysisEntry& cal = *succ.callee;
        for (size_t j = 0; j < cal.output_args.size(); ++j) {
            size_t pos = cal.output_args[j];
            if (pos >= a->args.size()) continue;
            const TermPtr& t = a->args[pos];
            if (t->kind != Term::Kind::Var || e.env.count(t->name)) continue;
            if (j >= cal.out_symbols.size()) continue;
            SchemaPtr shape = schema_nob(cal.out_symbols[j], g);
            std::vector<SlotInfo> slots;
            schema_slots(shape, slots);
            std::vector<std::optional<SEP>> exprs;
            for (size_t k2 = 0; k2 < slots.size(); ++k2) {
                for (int side = 0; side < 2; ++side) {
                    bool lower = side == 0;
                    std::string key = slot_out(j, k2, lower);
                    bool have = succ.same_scc ||
                                (succ.callee && cal.forms.count(key) > 0);
                    if (!have) {
                        exprs.push_back(std::nullopt);
                        continue;
                    }
                    SEP v = instantiate(succ, key, args, missing, lower,
                                        lower ? se_int(0) : se_inf());
                    if (se_is_inf(v) && !lower)
                        exprs.push_back(std::nullopt);
                    else
                        exprs.push_back(v);
                }
            }
            e.env[t->name] = schema_from_exprs(shape, exprs);
        }
    }
}

// ---------------------------------------------------------------------------
// Clause exit

namespace {

SEP chain_value(const AbstractElement& e, const std::string& final_var,
                const std::vector<std::string>& inputs, bool lower) {
    EqSystem sys;
    sys.fn = "@prime";
    sys.lower = lower;
    sys.inputs = inputs;
    for (const auto& r : e.rels) {
        if (r.lower != lower) continue;
        Inequation iq;
        iq.fn = r.var;
        iq.lower = r.lower;
        iq.rhs = r.expr;
        sys.eqs.push_back(std::move(iq));
    }
    Inequation fin_eq;
    fin_eq.fn = "@prime";
    fin_eq.lower = lower;
    fin_eq.rhs = se_var(final_var);
    sys.eqs.push_back(std::move(fin_eq));
    EqSystem n = normalize(sys);
    for (const auto& q : n.eqs)
        if (q.fn == "@prime") return se_canon(q.rhs);
    return lower ? se_int(0) : se_inf();
}

}  // namespace

ClausePrime exit_to_prime(const ClauseState& st, const AnalysisEntry& ver,
                          const std::vector<ResourceDef>& defs, const TypeGrammar& g) {
    ClausePrime p;
    if (!st.applicable) {
        p.applicable = false;
        p.error = st.error;
        return p;
    }
    const AbstractElement& e = st.elem;
    p.failed = e.failed;

    std::set<std::string> formal(ver.inputs.begin(), ver.inputs.end());
    for (const auto& c : e.d)
        if (formal.count(c.var)) dc_add(p.d, c);

    p.s_lo = chain_value(e, e.s_lo, ver.inputs, true);
    p.s_hi = chain_value(e, e.s_hi, ver.inputs, false);
    for (const auto& rd : defs) {
        auto it = e.res.find(rd.name);
        if (it == e.res.end()) continue;
        p.res[rd.name] = {chain_value(e, it->second.first, ver.inputs, true),
                          chain_value(e, it->second.second, ver.inputs, false)};
    }

    for (size_t j = 0; j < ver.output_args.size(); ++j) {
        SchemaPtr out;
        if (j < ver.out_symbols.size() && st.head &&
            ver.output_args[j] < st.head->args.size()) {
            TermPtr t = resolve_term(st.head->args[ver.output_args[j]], st.defs);
            out = compose_size(t, ver.out_symbols[j], g, e.env);
        }
        p.outs.push_back(out);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Widening

namespace {

// Aggregation of one group's per-clause bounds: Sum for backtrack-accrued
// quantities, Max/Min for joins. A missing upper contribution poisons the
// group (no claim); a missing lower contribution degrades to 0.
struct Agg {
    enum class Mode { Sum, Max, Min };
    std::vector<std::optional<SEP>> xs;

    void add(const std::optional<SEP>& x) { xs.push_back(x); }

    // (expr, lossy); nullopt expr: emit no equation for the group.
    std::pair<std::optional<SEP>, bool> done(Mode m, bool lower) const {
        std::vector<SEP> ks;
        bool missing = false;
        for (const auto& x : xs) {
            if (x) ks.push_back(*x);
            else missing = true;
        }
        if (xs.empty()) return {std::nullopt, true};
        if (missing && (m == Mode::Sum || m == Mode::Max) && !lower)
            return {std::nullopt, true};
        if (missing) {
            if (m == Mode::Min || m == Mode::Sum) ks.push_back(se_int(0));
            // a missing lower claim contributes nothing
        }
        if (ks.empty()) return {std::nullopt, true};
        bool all_eq = true;
        for (const auto& k : ks) all_eq = all_eq && se_equal(se_canon(k), se_canon(ks[0]));
        SEP e;
        switch (m) {
            case Mode::Sum: e = ks.size() == 1 ? ks[0] : se_add(ks); break;
            case Mode::Max: e = ks.size() == 1 ? ks[0] : se_max(ks); break;
            case Mode::Min: e = ks.size() == 1 ? ks[0] : se_min(ks); break;
        }
        bool lossy = missing;
        if (ks.size() > 1 && m != Mode::Sum && !all_eq) lossy = true;
        if (m == Mode::Min && missing) lossy = true;
        return {se_canon(e), lossy};
    }
};

// Two clause domains are disjoint when some variable's constraints are
// jointly unsatisfiable (only lower bounds and equalities occur in a d).
bool dc_disjoint(const std::vector<DomCon>& a, const std::vector<DomCon>& b) {
    std::map<std::string, std::vector<const DomCon*>> by_var;
    for (const auto& c : a) by_var[c.var].push_back(&c);
    for (const auto& c : b) by_var[c.var].push_back(&c);
    for (const auto& [var, cs] : by_var) {
        std::optional<Rat> eq;
        bool contra = false;
        for (const DomCon* c : cs) {
            if (c->rel != DomCon::Rel::Eq) continue;
            if (eq && !(*eq == c->k)) contra = true;
            eq = c->k;
        }
        if (contra) return true;
        if (!eq) continue;
        for (const DomCon* c : cs) {
            if (c->rel == DomCon::Rel::Ge && *eq < c->k) return true;
            if (c->rel == DomCon::Rel::Gt && !(c->k < *eq)) return true;
        }
    }
    return false;
}

std::vector<DomCon> side_guard(const std::vector<DomCon>& d,
                               const std::map<std::string, bool>& is_lower_formal,
                               bool lower) {
    std::vector<DomCon> out;
    for (const auto& c : d) {
        auto it = is_lower_formal.find(c.var);
        if (it != is_lower_formal.end() && it->second == lower) out.push_back(c);
    }
    return out;
}

void refine_forms_nf_det(std::map<std::string, ClosedForm>& forms, NF nf, Det det) {
    auto& sl = forms[slot_sol(true)];
    auto& su = forms[slot_sol(false)];
    if (nf == NF::Fails) {
        ClosedForm zero;
        zero.cases.push_back({{}, se_int(0)});
        zero.inputs = sl.inputs;
        zero.exact = false;
        zero.pattern = "nf";
        sl = zero;
    } else {
        bool changed = false;
        for (auto& c : sl.cases) {
            SEP m = se_canon(se_max({c.expr, se_int(1)}));
            if (!se_equal(m, se_canon(c.expr))) changed = true;
            c.expr = m;
        }
        if (sl.cases.empty()) {
            sl.cases.push_back({{}, se_int(1)});
            changed = true;
        }
        if (changed) {
            sl.exact = false;
            sl.pattern = sl.pattern.empty() ? "nf" : sl.pattern + "+nf";
        }
    }
    if (det == Det::IsDet) {
        ClosedForm one;
        one.cases.push_back({{}, se_int(1)});
        one.inputs = su.inputs;
        one.exact = true;
        one.pattern = "det";
        su = one;
        for (auto& c : sl.cases) c.expr = se_canon(se_min({c.expr, se_int(1)}));
    }
}

}  // namespace

void widen(AnalysisEntry& ver, const WidenInput& in, const std::vector<ResourceDef>& defs,
           const std::map<std::string, EqSystem>& scc_raw,
           const std::map<std::string, ClosedForm>& solved, Fresh& fresh,
           std::vector<std::string>& diags) {
    (void)fresh;
    std::vector<const ClausePrime*> primes;
    for (const auto& p : in.primes)
        if (p.applicable) primes.push_back(&p);

    std::map<std::string, bool> formal_lower;
    for (const auto& m : ver.meta) formal_lower[m.var] = m.lower;

    // Group clause primes by identical domain.
    std::vector<std::pair<std::vector<DomCon>, std::vector<const ClausePrime*>>> groups;
    for (const ClausePrime* p : primes) {
        auto key = d_strs(p->d);
        bool placed = false;
        for (auto& grp : groups) {
            if (d_strs(grp.first) == key) {
                grp.second.push_back(p);
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({p->d, {p}});
    }

    // A group's claims must also cover clauses of every overlapping domain:
    // on shared inputs those clauses run too. Disjoint groups are unaffected.
    std::vector<std::vector<const ClausePrime*>> over(groups.size());
    for (size_t gi = 0; gi < groups.size(); ++gi)
        for (size_t gj = 0; gj < groups.size(); ++gj)
            if (gi == gj || !dc_disjoint(groups[gi].first, groups[gj].first))
                for (const ClausePrime* p : groups[gj].second) over[gi].push_back(p);

    // Output slot shapes (one schema per output arg).
    std::vector<size_t> out_slot_count;
    std::vector<std::vector<SlotInfo>> out_slots;
    for (size_t j = 0; j < ver.out_symbols.size(); ++j) {
        std::vector<SlotInfo> slots;
        for (const ClausePrime* p : primes) {
            if (j < p->outs.size() && p->outs[j]) {
                schema_slots(p->outs[j], slots);
                break;
            }
        }
        out_slots.push_back(slots);
        out_slot_count.push_back(slots.size());
    }

    // Build the raw equation systems.
    ver.raw.clear();
    std::set<std::string> lossy_slots;
    auto mk_sys = [&](const std::string& slot, bool lower) {
        EqSystem sys;
        sys.fn = ver.version + "|" + slot;
        sys.lower = lower;
        sys.inputs = ver.inputs;
        sys.lows = ver.lows;
        return sys;
    };

    // Sizes.
    for (size_t j = 0; j < ver.out_symbols.size(); ++j) {
        for (size_t k = 0; k < out_slot_count[j]; ++k) {
            for (int side = 0; side < 2; ++side) {
                bool lower = side == 0;
                EqSystem sys = mk_sys(slot_out(j, k, lower), lower);
                bool any = false, lossy_any = false;
                for (size_t gi = 0; gi < groups.size(); ++gi) {
                    auto& grp = groups[gi];
                    Agg agg;
                    for (const ClausePrime* p : over[gi]) {
                        std::optional<SEP> v;
                        if (j < p->outs.size() && p->outs[j]) {
                            auto exprs = schema_slot_exprs(p->outs[j]);
                            size_t idx = 2 * k + (lower ? 0 : 1);
                            if (idx < exprs.size()) v = exprs[idx];
                        }
                        agg.add(v);
                    }
                    auto [e2, lossy] = agg.done(lower ? Agg::Mode::Min : Agg::Mode::Max, lower);
                    lossy_any = lossy_any || lossy;
                    if (!e2) continue;
                    Inequation iq;
                    iq.fn = sys.fn;
                    iq.lower = lower;
                    iq.rhs = *e2;
                    iq.guard = side_guard(grp.first, formal_lower, lower);
                    sys.eqs.push_back(std::move(iq));
                    any = true;
                }
                if (any) {
                    ver.raw[slot_out(j, k, lower)] = sys;
                    if (lossy_any) lossy_slots.insert(slot_out(j, k, lower));
                }
            }
        }
    }

    // Solutions: backtracking visits every clause of a common domain, so the
    // upper side sums (max once the clauses are proven mutually exclusive);
    // the lower side keeps the weakest claim of its own group.
    for (int side = 0; side < 2; ++side) {
        bool lower = side == 0;
        EqSystem sys = mk_sys(slot_sol(lower), lower);
        for (size_t gi = 0; gi < groups.size(); ++gi) {
            auto& grp = groups[gi];
            Agg agg;
            for (const ClausePrime* p : lower ? grp.second : over[gi])
                agg.add(lower ? p->s_lo : p->s_hi);
            Agg::Mode m;
            if (lower)
                m = Agg::Mode::Min;
            else
                m = in.exclusive ? Agg::Mode::Max : Agg::Mode::Sum;
            auto [e2, lossy] = agg.done(m, lower);
            if (lossy) lossy_slots.insert(slot_sol(lower));
            if (!e2) continue;
            Inequation iq;
            iq.fn = sys.fn;
            iq.lower = lower;
            iq.rhs = *e2;
            iq.guard = side_guard(grp.first, formal_lower, lower);
            sys.eqs.push_back(std::move(iq));
        }
        ver.raw[slot_sol(lower)] = sys;
    }

    // Resources: upper sums over a common domain — max needs the clauses
    // mutually exclusive before any charge lands, since a rejected clause
    // may still have spent on later guards. Lower keeps the weakest claim
    // of its own group (or sums, per the resource's declared aggregation).
    for (const auto& rd : defs) {
        for (int side = 0; side < 2; ++side) {
            bool lower = side == 0;
            EqSystem sys = mk_sys(slot_res(rd.name, lower), lower);
            for (size_t gi = 0; gi < groups.size(); ++gi) {
                auto& grp = groups[gi];
                Agg agg;
                for (const ClausePrime* p : lower ? grp.second : over[gi]) {
                    auto it = p->res.find(rd.name);
                    std::optional<SEP> v;
                    if (it != p->res.end()) v = lower ? it->second.first : it->second.second;
                    agg.add(v);
                }
                Agg::Mode m;
                if (lower)
                    m = rd.agg_lb_min ? Agg::Mode::Min : Agg::Mode::Sum;
                else
                    m = (rd.agg_ub_sum && !in.excl_leading) ? Agg::Mode::Sum : Agg::Mode::Max;
                auto [e2, lossy] = agg.done(m, lower);
                if (lossy) lossy_slots.insert(slot_res(rd.name, lower));
                if (!e2) continue;
                Inequation iq;
                iq.fn = sys.fn;
                iq.lower = lower;
                iq.rhs = *e2;
                iq.guard = side_guard(grp.first, formal_lower, lower);
                sys.eqs.push_back(std::move(iq));
            }
            ver.raw[slot_res(rd.name, lower)] = sys;
        }
    }

    // Solve: sizes, then solutions (refined by nf/det), then resources.
    SystemSet scc = scc_raw;
    for (const auto& [slot, sys] : ver.raw) scc[ver.version + "|" + slot] = sys;
    std::map<std::string, ClosedForm> local = solved;
    for (const auto& [key, sys] : scc) local.erase(key);

    auto solve_slot = [&](const std::string& slot) {
        auto it = ver.raw.find(slot);
        if (it == ver.raw.end()) return;
        ClosedForm cf = solve_system(it->second, scc, local);
        cf.inputs = ver.inputs;
        if (lossy_slots.count(slot)) cf.exact = false;
        if (cf.pattern == "fallback")
            diags.push_back("solver fallback for " + ver.version + " slot " + slot +
                            (cf.note.empty() ? "" : " (" + cf.note + ")"));
        ver.forms[slot] = cf;
        local[ver.version + "|" + slot] = cf;
    };

    ver.forms.clear();
    for (size_t j = 0; j < ver.out_symbols.size(); ++j)
        for (size_t k = 0; k < out_slot_count[j]; ++k)
            for (int side = 1; side >= 0; --side) solve_slot(slot_out(j, k, side == 0));
    for (int side = 1; side >= 0; --side) solve_slot(slot_sol(side == 0));
    refine_forms_nf_det(ver.forms, in.nf, in.det);
    local[ver.version + "|" + slot_sol(true)] = ver.forms[slot_sol(true)];
    local[ver.version + "|" + slot_sol(false)] = ver.forms[slot_sol(false)];
    for (const auto& rd : defs)
        for (int side = 1; side >= 0; --side) solve_slot(slot_res(rd.name, side == 0));

    // Success summary element.
    AbstractElement s;
    s.version = ver.version;
    s.bottom = false;
    s.d = ver.call_d;
    s.nf = in.nf;
    s.det = in.det;
    s.failed = in.nf == NF::Fails;
    s.s_lo = "sL@" + ver.version;
    s.s_hi = "sU@" + ver.version;
    auto emit = [&](const std::string& var, const std::string& slot, bool lower) {
        auto it = ver.forms.find(slot);
        if (it == ver.forms.end()) {
            s.rels.push_back({var, lower, lower ? se_int(0) : se_inf(), {}});
            return;
        }
        for (const auto& c : it->second.cases) s.rels.push_back({var, lower, c.expr, c.guard});
        if (it->second.cases.empty())
            s.rels.push_back({var, lower, lower ? se_int(0) : se_inf(), {}});
    };
    emit(s.s_lo, slot_sol(true), true);
    emit(s.s_hi, slot_sol(false), false);
    for (const auto& rd : defs) {
        std::string lo = "rL:" + rd.name + "@" + ver.version;
        std::string hi = "rU:" + rd.name + "@" + ver.version;
        s.res[rd.name] = {lo, hi};
        emit(lo, slot_res(rd.name, true), true);
        emit(hi, slot_res(rd.name, false), false);
    }
    ver.success = s;
}

std::string element_str(const AbstractElement& e) {
    std::ostringstream os;
    if (e.bottom) os << "bottom ";
    os << "<s=(" << e.s_lo << "," << e.s_hi << ")";
    for (const auto& [rn, pr] : e.res)
        os << " " << rn << "=(" << pr.first << "," << pr.second << ")";
    os << (e.failed ? " failed" : "");
    os << " d={";
    bool first = true;
    for (const auto& c : e.d) {
        if (!first) os << ",";
        first = false;
        os << domcon_str(c);
    }
    os << "} rels=" << e.rels.size();
    os << (e.nf == NF::NotFails ? " not_fails" : " fails");
    os << (e.det == Det::IsDet ? " is_det" : " non_det") << ">";
    return os.str();
}

}  // namespace sra
