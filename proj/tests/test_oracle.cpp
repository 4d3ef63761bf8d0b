#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "sra/fixpoint.hpp"
#include "sra/frontend.hpp"
#include "sra/oracle.hpp"

using namespace sra;

namespace {

const char* kAppend = R"(
:- regtype listnum := [] | [num|listnum].
:- entry append(+listnum, +listnum, -listnum).
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
)";

const char* kListFact = R"(
:- regtype listnum := [] | [num|listnum].
:- entry fact(+nat, -num).
:- entry listfact(+listnum, -listnum).
fact(0, 1).
fact(N, F) :- N > 0, N1 is N - 1, fact(N1, F1), F is N * F1.
listfact([], []).
listfact([E|Es], [F|Fs]) :- fact(E, F), listfact(Es, Fs).
)";

Program parsed(const char* text) { return parse_program(text); }

std::vector<ResourceDef> steps_only(const Program& p) {
    return program_resources(p);
}

TermPtr ilist(const std::vector<long long>& xs) {
    std::vector<TermPtr> ts;
    for (long long x : xs) ts.push_back(mk_int(x));
    return mk_list(ts);
}

Rat steps(const ConcreteMeasure& m) { return m.totals.at("steps"); }

}  // namespace

TEST_CASE("append run: one solution in three clause entries") {
    Program p = parsed(kAppend);
    TermPtr goal = mk_comp("append", {ilist({1, 2}), ilist({3}), mk_var("Z")});
    ConcreteMeasure m = run_goal(p, goal, steps_only(p));
    REQUIRE(m.valid);
    CHECK(m.solutions == 1);
    CHECK(steps(m) == Rat(3));
}

TEST_CASE("fact(0): the guarded clause never charges") {
    Program p = parsed(kListFact);
    ConcreteMeasure m =
        run_goal(p, mk_comp("fact", {mk_int(0), mk_var("F")}), steps_only(p));
    REQUIRE(m.valid);
    CHECK(m.solutions == 1);
    CHECK(steps(m) == Rat(1));
}

TEST_CASE("listfact([2,3]) charges ten entries") {
    Program p = parsed(kListFact);
    ConcreteMeasure m = run_goal(
        p, mk_comp("listfact", {ilist({2, 3}), mk_var("R")}), steps_only(p));
    REQUIRE(m.valid);
    CHECK(m.solutions == 1);
    CHECK(steps(m) == Rat(10));
}

TEST_CASE("raw and normalized programs measure identically") {
    for (const char* text : {kAppend, kListFact}) {
        Program raw = parsed(text);
        Program norm = normalize_program(parsed(text));
        auto defs = steps_only(raw);
        std::vector<TermPtr> goals = {
            mk_comp("append", {ilist({1, 2, 3}), ilist({4}), mk_var("Z")}),
            mk_comp("fact", {mk_int(4), mk_var("F")}),
            mk_comp("listfact", {ilist({2, 0, 3}), mk_var("R")}),
        };
        for (const auto& g : goals) {
            if (!raw.clauses.empty() &&
                !std::any_of(raw.clauses.begin(), raw.clauses.end(),
                             [&](const Clause& c) { return c.head->name == g->name; }))
                continue;
            ConcreteMeasure a = run_goal(raw, g, defs);
            ConcreteMeasure b = run_goal(norm, g, defs);
            REQUIRE(a.valid == b.valid);
            CHECK(a.solutions == b.solutions);
            for (const auto& [k, v] : a.totals) CHECK(v == b.totals.at(k));
        }
    }
}

TEST_CASE("multi-solution search counts every success leaf") {
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry mem(-num, +listnum).
mem(X, [X|_]).
mem(X, [_|T]) :- mem(X, T).
)";
    Program p = parsed(text);
    ConcreteMeasure m = run_goal(
        p, mk_comp("mem", {mk_var("X"), ilist({1, 2, 3})}), steps_only(p));
    REQUIRE(m.valid);
    CHECK(m.solutions == 3);
    // entries: clause 1 succeeds at each of the three spine positions and
    // clause 2 extends the spine three times; the empty tail matches nothing
    CHECK(steps(m) == Rat(6));
}

TEST_CASE("step limit trips into a divergence report") {
    const char* text = R"(
:- entry loop(+num).
loop(N) :- loop(N).
)";
    Program p = parsed(text);
    OracleLimits lim;
    lim.max_steps = 500;
    ConcreteMeasure m = run_goal(p, mk_comp("loop", {mk_int(1)}),
                                 steps_only(p), lim);
    CHECK(!m.valid);
    CHECK(!m.divergence.empty());
}

TEST_CASE("operator costs follow the program text") {
    const char* text = R"(
:- resource mults(headcost=0, litcost=0, opcost(*)=1, default=(0,0)).
:- entry sq(+num, -num).
sq(N, M) :- M is N * N + N * 1 - N.
)";
    Program p = parsed(text);
    auto defs = program_resources(p);
    ConcreteMeasure m =
        run_goal(p, mk_comp("sq", {mk_int(3), mk_var("M")}), defs);
    REQUIRE(m.valid);
    CHECK(m.totals.at("mults") == Rat(2));
    CHECK(m.totals.at("steps") == Rat(1));
}

TEST_CASE("generator produces members within budget, deterministically") {
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry id(+listnum, -listnum).
id(L, L).
)";
    Program p = normalize_program(parsed(text));
    std::vector<std::string> errs;
    TypeGrammar g = build_grammar(p, errs);
    REQUIRE(errs.empty());

    auto xs = generate_inputs("listnum", g, 3, 42, 200);
    auto ys = generate_inputs("listnum", g, 3, 42, 200);
    REQUIRE(xs.size() == 200);
    for (size_t i = 0; i < xs.size(); ++i) {
        REQUIRE(xs[i]);
        CHECK(term_equal(xs[i], ys[i]));
        CHECK(membership(xs[i], "listnum", g));
        size_t len = 0;
        TermPtr t = xs[i];
        while (is_cons(t)) {
            ++len;
            CHECK(t->args[0]->kind == Term::Kind::Int);
            CHECK(t->args[0]->value >= 0);
            CHECK(t->args[0]->value <= 3);
            t = t->args[1];
        }
        CHECK(len <= 3);
    }
    // different seed, different stream
    auto zs = generate_inputs("listnum", g, 3, 43, 200);
    bool any_diff = false;
    for (size_t i = 0; i < zs.size(); ++i)
        if (!term_equal(xs[i], zs[i])) any_diff = true;
    CHECK(any_diff);

    // budget zero admits only the empty list
    auto e = generate_inputs("listnum", g, 0, 7, 20);
    for (const auto& t : e) {
        REQUIRE(t);
        CHECK(is_nil(t));
    }
}

TEST_CASE("enumerated constant types generate uniformly seeded members") {
    const char* text = R"(
:- regtype cmp := lt | eq | gt.
:- entry id(+cmp, -cmp).
id(X, X).
)";
    Program p = normalize_program(parsed(text));
    std::vector<std::string> errs;
    TypeGrammar g = build_grammar(p, errs);
    REQUIRE(errs.empty());
    auto xs = generate_inputs("cmp", g, 0, 9, 60);
    std::set<std::string> seen;
    for (const auto& t : xs) {
        REQUIRE(t);
        CHECK(membership(t, "cmp", g));
        seen.insert(t->name);
    }
    CHECK(seen.size() == 3);
}

TEST_CASE("measured bounds hold for append across seeded inputs") {
    AnalysisResult r = analyze(parse_program(kAppend));
    REQUIRE(r.ok);
    const AnalysisEntry* v = find_version(r, "append/3#1");
    REQUIRE(v);
    auto xs = generate_inputs("listnum", r.grammar, 5, 11, 40);
    auto ys = generate_inputs("listnum", r.grammar, 5, 12, 40);
    for (size_t i = 0; i < xs.size(); ++i) {
        TermPtr goal = mk_comp("append", {xs[i], ys[i], mk_var("Z")});
        ConcreteMeasure m = run_goal(r.prog, goal, r.resources);
        REQUIRE(m.valid);
        auto sizes = measured_sizes(*v, {xs[i], ys[i]}, r.grammar);
        Verdict verdict = check_bounds(m, *v, sizes);
        for (const auto& viol : verdict.violations) CAPTURE(viol);
        CHECK(verdict.pass);
    }
}

TEST_CASE("violated bounds are reported with the offending side") {
    AnalysisResult r = analyze(parse_program(kAppend));
    const AnalysisEntry* v = find_version(r, "append/3#1");
    REQUIRE(v);
    ConcreteMeasure fake;
    fake.solutions = 5;  // analyzer proved exactly 1
    fake.totals["steps"] = Rat(0);
    TermPtr a = ilist({1, 2});
    TermPtr b = ilist({3});
    auto sizes = measured_sizes(*v, {a, b}, r.grammar);
    Verdict verdict = check_bounds(fake, *v, sizes);
    CHECK(!verdict.pass);
    bool upper = false, lower = false;
    for (const auto& viol : verdict.violations) {
        if (viol.find("solutions") != std::string::npos &&
            viol.find("above upper") != std::string::npos)
            upper = true;
        if (viol.find("steps") != std::string::npos &&
            viol.find("below lower") != std::string::npos)
            lower = true;
    }
    CHECK(upper);
    CHECK(lower);
}
