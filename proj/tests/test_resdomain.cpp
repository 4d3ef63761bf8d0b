#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sra/frontend.hpp"
#include "sra/resdomain.hpp"

using namespace sra;

namespace {

struct Mini {
    Program prog;
    TypeGrammar g;
    std::vector<ResourceDef> defs;
    Fresh fresh;
    AnalysisEntry ver;
    AuxResults aux;

    explicit Mini(const std::string& text, const std::string& pred) {
        prog = normalize_program(parse_program(text));
        std::vector<std::string> errs;
        g = build_grammar(prog, errs);
        REQUIRE(errs.empty());
        defs = program_resources(prog);
        const EntryDecl* ed = nullptr;
        for (const auto& e : prog.entries)
            if (e.pred == pred) ed = &e;
        REQUIRE(ed != nullptr);
        ver.pred_key = pred_key(ed->pred, ed->args.size());
        ver.version = ver.pred_key + "#1";
        std::vector<std::string> in_syms;
        for (size_t i = 0; i < ed->args.size(); ++i) {
            if (ed->args[i].mode == Mode::In) {
                ver.input_args.push_back(i);
                in_syms.push_back(type_symbol_for(ed->args[i].type, g, errs));
            } else {
                ver.output_args.push_back(i);
                ver.out_symbols.push_back(type_symbol_for(ed->args[i].type, g, errs));
            }
        }
        REQUIRE(errs.empty());
        build_formals(ver, in_syms, g);
    }

    std::vector<Clause> clauses_of() {
        std::vector<Clause> out;
        for (const auto& c : prog.clauses)
            if (pred_key(c.head->name, c.head->args.size()) == ver.pred_key)
                out.push_back(c);
        return out;
    }

    // Analyzes all clauses with self-recursive calls kept symbolic and
    // widens once (enough when every callee is the predicate itself).
    void run(NF nf, Det det, bool exclusive) {
        WidenInput in;
        in.nf = nf;
        in.det = det;
        in.exclusive = exclusive;
        for (const auto& c : clauses_of()) {
            ClauseState st = call_to_entry(ver, c, defs, g, fresh);
            for (size_t i = c.head_prefix; i < c.body.size(); ++i) {
                const auto& atom = c.body[i].atom;
                LiteralSuccess succ;
                if (!is_builtin(atom->name, atom->args.size())) {
                    REQUIRE(pred_key(atom->name, atom->args.size()) == ver.pred_key);
                    succ.callee = &ver;
                    succ.same_scc = true;
                    succ.nf = nf;
                    succ.det = det;
                }
                extend(st, c.body[i], succ, defs, g, fresh, nf == NF::Fails);
            }
            in.primes.push_back(exit_to_prime(st, ver, defs, g));
        }
        std::vector<std::string> diags;
        widen(ver, in, defs, {}, {}, fresh, diags);
    }
};

std::map<std::string, Rat> asg(const AnalysisEntry& ver, const std::vector<long long>& vals) {
    std::map<std::string, Rat> m;
    REQUIRE(ver.inputs.size() == vals.size());
    for (size_t i = 0; i < vals.size(); ++i) m[ver.inputs[i]] = Rat(vals[i]);
    return m;
}

long long num(const std::optional<Val>& v) {
    REQUIRE(v.has_value());
    REQUIRE(!v->inf);
    REQUIRE(v->q.is_int());
    return v->q.num;
}

const char* kAppend = R"(
:- regtype listnum := [] | [num|listnum].
:- entry append(+listnum, +listnum, -listnum).
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
)";

AbstractElement simple_elem(const std::vector<ResourceDef>& defs, Fresh& fresh,
                            long long s, long long cost) {
    AbstractElement e = bottom(defs, fresh);
    e.bottom = false;
    e.failed = false;
    e.rels.clear();
    e.rels.push_back({e.s_lo, true, se_int(s), {}});
    e.rels.push_back({e.s_hi, false, se_int(s), {}});
    for (const auto& [rn, pr] : e.res) {
        e.rels.push_back({pr.first, true, se_int(cost), {}});
        e.rels.push_back({pr.second, false, se_int(cost), {}});
    }
    return e;
}

}  // namespace

TEST_CASE("bottom carries the default claims and sits below everything") {
    std::vector<ResourceDef> defs = {resource_from_decl([] {
        ResourceDecl d;
        d.name = "steps";
        return d;
    }())};
    Fresh fresh;
    AbstractElement bot = bottom(defs, fresh);
    CHECK(bot.bottom);
    CHECK(bot.failed);
    CHECK(bot.nf == NF::Fails);
    CHECK(bot.det == Det::NonDet);
    CHECK(bot.s_lo != bot.s_hi);
    REQUIRE(bot.res.count("steps"));
    CHECK(bot.rels.size() == 4);

    AbstractElement e = simple_elem(defs, fresh, 1, 3);
    CHECK(leq(bot, e));
    CHECK(!leq(e, bot));
    CHECK(leq(bot, bot));
}

TEST_CASE("leq is reflexive, drops of relations go down, extra domain goes down") {
    std::vector<ResourceDef> defs = {resource_from_decl([] {
        ResourceDecl d;
        d.name = "steps";
        return d;
    }())};
    Fresh fresh;
    AbstractElement e = simple_elem(defs, fresh, 2, 5);
    CHECK(leq(e, e));

    AbstractElement fewer = e;
    fewer.rels.pop_back();
    CHECK(leq(fewer, e));
    CHECK(!leq(e, fewer));

    AbstractElement narrower = e;
    narrower.d.push_back({"x", DomCon::Rel::Gt, Rat(0)});
    CHECK(leq(narrower, e));
    CHECK(!leq(e, narrower));
}

TEST_CASE("lub joins guard-cased relation groups and bounds both sides") {
    std::vector<ResourceDef> defs = {resource_from_decl([] {
        ResourceDecl d;
        d.name = "steps";
        return d;
    }())};
    Fresh fresh;
    AbstractElement a = simple_elem(defs, fresh, 1, 1);
    a.d.push_back({"b", DomCon::Rel::Eq, Rat(0)});
    AbstractElement b = simple_elem(defs, fresh, 1, 7);
    b.d.push_back({"b", DomCon::Rel::Gt, Rat(0)});

    AbstractElement j = lub(a, b, fresh);
    CHECK(j.d.empty());
    bool tagged_eq = false, tagged_gt = false;
    for (const auto& r : j.rels)
        for (const auto& c : r.guard) {
            if (c.rel == DomCon::Rel::Eq) tagged_eq = true;
            if (c.rel == DomCon::Rel::Gt) tagged_gt = true;
        }
    CHECK(tagged_eq);
    CHECK(tagged_gt);
    CHECK(leq(a, j));
    CHECK(leq(b, j));

    AbstractElement same = lub(a, a, fresh);
    CHECK(leq(same, a));
    CHECK(leq(a, same));
}

TEST_CASE("call_to_entry on a base clause: unit claims and pattern domain") {
    Mini m(kAppend, "append");
    auto cs = m.clauses_of();
    REQUIRE(cs.size() == 2);

    ClauseState st = call_to_entry(m.ver, cs[0], m.defs, m.g, m.fresh);
    REQUIRE(st.applicable);
    const AbstractElement& e = st.elem;
    CHECK(!e.failed);
    // first list argument matched against []: both count slots pinned to 0
    bool lo0 = false, hi0 = false;
    for (const auto& c : e.d) {
        if (c.var == m.ver.inputs[0] && c.rel == DomCon::Rel::Eq && c.k == Rat(0)) lo0 = true;
        if (c.var == m.ver.inputs[1] && c.rel == DomCon::Rel::Eq && c.k == Rat(0)) hi0 = true;
    }
    CHECK(lo0);
    CHECK(hi0);

    ClausePrime p = exit_to_prime(st, m.ver, m.defs, m.g);
    CHECK(num(se_eval(p.s_lo, {})) == 1);
    CHECK(num(se_eval(p.s_hi, {})) == 1);
    CHECK(num(se_eval(p.res.at("steps").first, {})) == 1);
    CHECK(num(se_eval(p.res.at("steps").second, {})) == 1);
    // output = second argument: its count slots are the argument's formals
    REQUIRE(p.outs.size() == 1);
    REQUIRE(p.outs[0]);
    auto exprs = schema_slot_exprs(p.outs[0]);
    REQUIRE(exprs.size() == 4);
    CHECK(se_equal(*exprs[0], se_var(m.ver.inputs[4])));
    CHECK(se_equal(*exprs[1], se_var(m.ver.inputs[5])));
}

TEST_CASE("extend threads recursive calls symbolically") {
    Mini m(kAppend, "append");
    auto cs = m.clauses_of();
    ClauseState st = call_to_entry(m.ver, cs[1], m.defs, m.g, m.fresh);
    REQUIRE(st.applicable);
    const auto& body = cs[1].body;
    REQUIRE((size_t)cs[1].head_prefix < body.size());
    LiteralSuccess succ;
    succ.callee = &m.ver;
    succ.same_scc = true;
    succ.nf = NF::NotFails;
    succ.det = Det::IsDet;
    extend(st, body[cs[1].head_prefix], succ, m.defs, m.g, m.fresh, false);

    ClausePrime p = exit_to_prime(st, m.ver, m.defs, m.g);
    CHECK(se_contains_call(p.s_hi));
    CHECK(se_contains_call(p.res.at("steps").second));
    // the recursive call's first argument lost one list element
    std::string s = se_str(se_canon(p.res.at("steps").second));
    CHECK(s.find(m.ver.inputs[1]) != std::string::npos);
}

TEST_CASE("widen solves append: steps bounded by list lengthplus one") {
    Mini m(kAppend, "append");
    m.run(NF::NotFails, Det::IsDet, true);

    const ClosedForm& ub = m.ver.forms.at(slot_res("steps", false));
    const ClosedForm& lb = m.ver.forms.at(slot_res("steps", true));
    // at first-list length 2: three clause entries
    CHECK(num(evaluate(ub, asg(m.ver, {2, 2, 1, 3, 1, 1, 3, 3}))) == 3);
    CHECK(num(evaluate(lb, asg(m.ver, {2, 2, 1, 3, 1, 1, 3, 3}))) == 3);
    CHECK(num(evaluate(ub, asg(m.ver, {0, 0, 0, 0, 0, 0, 0, 0}))) == 1);
    CHECK(ub.exact);
    CHECK(lb.exact);

    // order: linear in the first list's length
    CHECK(se_str(order_of_form(ub, m.ver.lows)) == m.ver.inputs[1]);
    CHECK(se_str(order_of_form(lb, m.ver.lows)) == m.ver.inputs[0]);

    // solutions pinned to one by the determinacy refinement
    CHECK(num(evaluate(m.ver.forms.at(slot_sol(false)), asg(m.ver, {5, 5, 0, 9, 2, 2, 0, 9}))) == 1);
    CHECK(num(evaluate(m.ver.forms.at(slot_sol(true)), asg(m.ver, {5, 5, 0, 9, 2, 2, 0, 9}))) == 1);

    // output length: sum of the two input lengths
    const ClosedForm& len_ub = m.ver.forms.at(slot_out(0, 0, false));
    CHECK(num(evaluate(len_ub, asg(m.ver, {2, 2, 1, 3, 4, 4, 1, 1}))) == 6);
    const ClosedForm& len_lb = m.ver.forms.at(slot_out(0, 0, true));
    CHECK(num(evaluate(len_lb, asg(m.ver, {2, 2, 1, 3, 4, 4, 1, 1}))) == 6);
}

TEST_CASE("widen keeps distinct domains as separate guarded cases") {
    Mini m(kAppend, "append");
    m.run(NF::NotFails, Det::IsDet, true);
    const EqSystem& sys = m.ver.raw.at(slot_res("steps", false));
    REQUIRE(sys.eqs.size() == 2);
    bool base = false, rec = false;
    for (const auto& q : sys.eqs) {
        if (!q.guard.empty() && q.guard[0].rel == DomCon::Rel::Eq && !se_contains_call(q.rhs))
            base = true;
        if (se_contains_call(q.rhs)) {
            rec = true;
            // upper system guards mention upper-side formals only
            for (const auto& c : q.guard) CHECK(c.var == m.ver.inputs[1]);
        }
    }
    CHECK(base);
    CHECK(rec);
}

TEST_CASE("failure refinement forces the solution lower bound to zero") {
    Mini m(kAppend, "append");
    m.run(NF::Fails, Det::NonDet, false);
    const ClosedForm& sl = m.ver.forms.at(slot_sol(true));
    REQUIRE(sl.cases.size() == 1);
    CHECK(sl.cases[0].guard.empty());
    CHECK(se_equal(sl.cases[0].expr, se_int(0)));
    CHECK(!sl.exact);
}

TEST_CASE("comparison under a failing predicate freezes lower bounds") {
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry p(+num, -listnum).
p(N, []) :- N > 0, p(N, _X).
)";
    Mini m(text, "p");
    auto cs = m.clauses_of();
    ClauseState st = call_to_entry(m.ver, cs[0], m.defs, m.g, m.fresh);
    LiteralSuccess cmp;
    extend(st, cs[0].body[cs[0].head_prefix], cmp, m.defs, m.g, m.fresh, true);
    CHECK(st.elem.failed);

    LiteralSuccess rec;
    rec.callee = &m.ver;
    rec.same_scc = true;
    rec.nf = NF::Fails;
    extend(st, cs[0].body[cs[0].head_prefix + 1], rec, m.defs, m.g, m.fresh, true);

    ClausePrime p = exit_to_prime(st, m.ver, m.defs, m.g);
    CHECK(num(se_eval(p.s_lo, {})) == 0);
    // frozen at the head cost, the recursive call's cost is not added
    CHECK(num(se_eval(p.res.at("steps").first, {})) == 1);
    CHECK(se_contains_call(p.res.at("steps").second));
    // the guard contributed a domain constraint on both value slots
    bool lo = false, hi = false;
    for (const auto& c : p.d) {
        if (c.var == m.ver.inputs[0] && c.rel == DomCon::Rel::Gt) lo = true;
        if (c.var == m.ver.inputs[1] && c.rel == DomCon::Rel::Gt) hi = true;
    }
    CHECK(lo);
    CHECK(hi);
}

TEST_CASE("unknown callee degrades to the default claims and freezes") {
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry p(+listnum, -listnum).
p(L, L) :- q(L).
)";
    Program prog = normalize_program(parse_program(text));
    // q is undefined: the engine binds it to bottom. Simulated here.
    Mini m(text, "p");
    auto cs = m.clauses_of();
    ClauseState st = call_to_entry(m.ver, cs[0], m.defs, m.g, m.fresh);
    LiteralSuccess unknown;  // no callee
    extend(st, cs[0].body[cs[0].head_prefix], unknown, m.defs, m.g, m.fresh, false);
    CHECK(st.elem.failed);

    ClausePrime p = exit_to_prime(st, m.ver, m.defs, m.g);
    CHECK(num(se_eval(p.s_lo, {})) == 0);
    CHECK(se_is_inf(p.s_hi));
    CHECK(num(se_eval(p.res.at("steps").first, {})) == 1);
    CHECK(num(se_eval(p.res.at("steps").second, {})) == 1);  // default upper 0
}

TEST_CASE("extend chains agree with the direct product-sum formula") {
    std::vector<ResourceDef> defs = {resource_from_decl([] {
        ResourceDecl d;
        d.name = "steps";
        d.litcost = 2;
        return d;
    }())};
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry k(+listnum, -listnum).
:- entry p(+listnum, -listnum).
k(L, L).
p(L, R) :- k(L, R).
)";
    Program prog = normalize_program(parse_program(text));
    std::vector<std::string> errs;
    TypeGrammar g = build_grammar(prog, errs);
    REQUIRE(errs.empty());

    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Fresh fresh;
        // fake callee with constant solved bounds
        AnalysisEntry cal;
        cal.version = "k/2#1";
        cal.pred_key = "k/2";
        cal.input_args = {0};
        cal.output_args = {1};
        cal.out_symbols = {"listnum"};
        build_formals(cal, {"listnum"}, g);

        AnalysisEntry caller;
        caller.version = "p/2#1";
        caller.pred_key = "p/2";
        caller.input_args = {0};
        caller.output_args = {1};
        caller.out_symbols = {"listnum"};
        build_formals(caller, {"listnum"}, g);

        const Clause* pc = nullptr;
        for (const auto& c : prog.clauses)
            if (c.head->name == "p") pc = &c;
        REQUIRE(pc);

        int n = 1 + (int)(rng() % 4);
        long long s_tot = 1, r_tot = 1;  // headcost
        ClauseState st = call_to_entry(caller, *pc, defs, g, fresh);
        for (int i = 0; i < n; ++i) {
            long long s_i = 1 + (long long)(rng() % 3);
            long long c_i = (long long)(rng() % 5);
            ClosedForm sf;
            sf.cases.push_back({{}, se_int(s_i)});
            sf.inputs = cal.inputs;
            ClosedForm rf;
            rf.cases.push_back({{}, se_int(c_i)});
            rf.inputs = cal.inputs;
            cal.forms[slot_sol(true)] = sf;
            cal.forms[slot_sol(false)] = sf;
            cal.forms[slot_res("steps", true)] = rf;
            cal.forms[slot_res("steps", false)] = rf;

            LiteralSuccess succ;
            succ.callee = &cal;
            succ.nf = NF::NotFails;
            extend(st, pc->body[pc->head_prefix], succ, defs, g, fresh, false);
            r_tot += s_tot * (2 + c_i);
            s_tot *= s_i;
        }
        ClausePrime p = exit_to_prime(st, caller, defs, g);
        CHECK(num(se_eval(p.s_hi, {})) == s_tot);
        CHECK(num(se_eval(p.s_lo, {})) == s_tot);
        CHECK(num(se_eval(p.res.at("steps").second, {})) == r_tot);
        CHECK(num(se_eval(p.res.at("steps").first, {})) == r_tot);
    }
}

TEST_CASE("operator costs charge user-declared resources") {
    const char* text = R"(
:- resource mults(headcost=0, litcost=0, opcost(*)=1, agg_ub=sum, agg_lb=min, default=(0,0)).
:- regtype listnum := [] | [num|listnum].
:- entry sq(+num, -num).
sq(N, M) :- M is N * N.
)";
    Mini m(text, "sq");
    REQUIRE(m.defs.size() == 2);  // implicit steps precedes the declaration
    CHECK(m.defs[0].name == "steps");
    CHECK(m.defs[1].name == "mults");
    m.run(NF::NotFails, Det::IsDet, true);
    const ClosedForm& ub = m.ver.forms.at(slot_res("mults", false));
    CHECK(num(evaluate(ub, asg(m.ver, {4, 4}))) == 1);
    // and the output value schema squares nothing: bounds come from N*N with
    // non-constant operands, so the slot is unbounded
    CHECK(m.ver.forms.count(slot_out(0, 0, false)) == 0);
}

TEST_CASE("is with constant operand scales the value interval") {
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry dec(+num, -num).
dec(N, M) :- M is N - 1.
)";
    Mini m(text, "dec");
    m.run(NF::NotFails, Det::IsDet, true);
    const ClosedForm& ub = m.ver.forms.at(slot_out(0, 0, false));
    const ClosedForm& lb = m.ver.forms.at(slot_out(0, 0, true));
    CHECK(num(evaluate(ub, asg(m.ver, {7, 7}))) == 6);
    CHECK(num(evaluate(lb, asg(m.ver, {3, 7}))) == 2);
}
