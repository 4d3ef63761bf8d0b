#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sra/auxdomains.hpp"

using namespace sra;

namespace {

struct Analyzed {
    Program prog;
    TypeGrammar gram;
    AuxResults aux;
    std::vector<std::string> diags;
};

Analyzed analyze(const std::string& text) {
    Analyzed a;
    a.prog = normalize_program(parse_program(text, "test"));
    std::vector<std::string> errs;
    a.gram = build_grammar(a.prog, errs);
    REQUIRE(errs.empty());
    a.aux = analyze_aux(a.prog, a.gram, a.diags);
    return a;
}

const char* kAppend = R"(
:- entry append(+list(num), +list(num), -list(num)).
append([], L, L).
append([X|Xs], L, [X|Zs]) :- append(Xs, L, Zs).
)";

}  // namespace

TEST_CASE("append is exclusive, non-failing, and deterministic") {
    auto a = analyze(kAppend);
    CHECK(clauses_mutually_exclusive(a.prog, a.gram, "append/3"));
    auto info = a.aux.get("append/3");
    CHECK(info.nf == NF::NotFails);
    CHECK(info.det == Det::IsDet);
}

TEST_CASE("missing nil case loses cover") {
    auto a = analyze(R"(
:- entry p(+list(num)).
p([_|_]).
)");
    auto info = a.aux.get("p/1");
    CHECK(info.exclusive);  // single clause
    CHECK(info.nf == NF::Fails);
    CHECK(info.det == Det::IsDet);
}

TEST_CASE("identical clause heads overlap") {
    auto a = analyze(R"(
:- entry p(+num).
p(_).
p(_).
)");
    auto info = a.aux.get("p/1");
    CHECK(!info.exclusive);
    CHECK(info.det == Det::NonDet);
    CHECK(info.nf == NF::NotFails);  // variable head covers everything
}

TEST_CASE("unguarded constant versus variable overlaps") {
    auto a = analyze(R"(
:- entry fact(+nat, -num).
fact(0, 1).
fact(N, F) :- N1 is N - 1, fact(N1, F1), F is N * F1.
)");
    CHECK(!clauses_mutually_exclusive(a.prog, a.gram, "fact/2"));
    CHECK(a.aux.get("fact/2").det == Det::NonDet);
}

TEST_CASE("guarded constant versus variable is exclusive and covers nat") {
    auto a = analyze(R"(
:- entry fact(+nat, -num).
fact(0, 1).
fact(N, F) :- N > 0, N1 is N - 1, fact(N1, F1), F is N * F1.
)");
    auto info = a.aux.get("fact/2");
    CHECK(info.exclusive);
    CHECK(info.det == Det::IsDet);
    CHECK(info.nf == NF::NotFails);
}

TEST_CASE("num entry leaves negatives uncovered") {
    auto a = analyze(R"(
:- entry h(+num, -num).
h(0, 0).
h(N, M) :- N > 0, N1 is N - 1, h(N1, M1), M is M1 + 1.
)");
    auto info = a.aux.get("h/2");
    CHECK(info.exclusive);
    CHECK(info.det == Det::IsDet);
    CHECK(info.nf == NF::Fails);
}

TEST_CASE("complementary single-variable guards cover and exclude") {
    auto a = analyze(R"(
:- entry p(+num, -num).
p(N, 0) :- N < 5.
p(N, 1) :- N >= 5.
)");
    auto info = a.aux.get("p/2");
    CHECK(info.exclusive);
    CHECK(info.det == Det::IsDet);
    CHECK(info.nf == NF::NotFails);
}

TEST_CASE("two-variable guards defeat the syntactic analysis") {
    auto a = analyze(R"(
:- entry order2(+num, +num, -num, -num).
order2(X, Y, X, Y) :- X =< Y.
order2(X, Y, Y, X) :- X > Y.
)");
    auto info = a.aux.get("order2/4");
    CHECK(!info.exclusive);
    CHECK(info.det == Det::NonDet);
    CHECK(info.nf == NF::Fails);
}

TEST_CASE("trust assertions override both analyses") {
    auto a = analyze(R"(
:- entry order2(+num, +num, -num, -num).
:- trust order2/4 + not_fails + is_det.
order2(X, Y, X, Y) :- X =< Y.
order2(X, Y, Y, X) :- X > Y.
)");
    auto info = a.aux.get("order2/4");
    CHECK(info.det == Det::IsDet);
    CHECK(info.nf == NF::NotFails);
}

TEST_CASE("trusted callees propagate to their callers") {
    auto a = analyze(R"(
:- entry order2(+num, +num, -num, -num).
:- trust order2/4 + not_fails + is_det.
:- entry ins(+list(num), +num, -list(num)).
order2(X, Y, X, Y) :- X =< Y.
order2(X, Y, Y, X) :- X > Y.
ins([], X, [X]).
ins([Y|Ys], X, [Z|Zs]) :- order2(X, Y, Z, W), ins(Ys, W, Zs).
)");
    auto info = a.aux.get("ins/3");
    CHECK(info.exclusive);
    CHECK(info.det == Det::IsDet);
    CHECK(info.nf == NF::NotFails);
}

TEST_CASE("mutual recursion over partial cover settles to fails") {
    auto a = analyze(R"(
:- entry even(+nat, -num).
:- entry odd(+nat, -num).
even(0, 1).
even(N, R) :- N > 0, N1 is N - 1, odd(N1, R).
odd(N, R) :- N > 0, N1 is N - 1, even(N1, R).
)");
    CHECK(a.aux.get("odd/2").nf == NF::Fails);   // odd(0) has no clause
    CHECK(a.aux.get("even/2").nf == NF::Fails);  // even(2) reaches odd(1) -> even(0)? no: odd covers only N>0
    CHECK(a.aux.get("even/2").det == Det::IsDet);
    CHECK(a.aux.get("odd/2").det == Det::IsDet);
}

TEST_CASE("self-recursive non-failing loop keeps not_fails through the scc seed") {
    auto a = analyze(kAppend);
    // append's recursive clause calls append itself; the optimistic seed must
    // not be destroyed by the recursion.
    CHECK(a.aux.get("append/3").nf == NF::NotFails);
}

TEST_CASE("statically false guards drop a clause from consideration") {
    auto a = analyze(R"(
:- entry p(+num).
p(_) :- 1 > 2.
p(_).
)");
    auto info = a.aux.get("p/1");
    // The impossible clause is ignored: the remaining single clause is
    // exclusive and covers.
    CHECK(info.exclusive);
    CHECK(info.nf == NF::NotFails);
    CHECK(info.det == Det::IsDet);
}

TEST_CASE("adding a failing clause never improves nonfailure") {
    auto base = analyze(R"(
:- entry p(+num, -num).
p(N, 0) :- N < 5.
)");
    CHECK(base.aux.get("p/2").nf == NF::Fails);
    auto more = analyze(R"(
:- entry p(+num, -num).
p(N, 0) :- N < 5.
p(N, 1) :- N > 7, N < 6.
)");
    CHECK(more.aux.get("p/2").nf == NF::Fails);
}

TEST_CASE("sccs come out callees first") {
    auto a = analyze(R"(
:- entry top(+num, -num).
:- entry mid(+num, -num).
:- entry leaf(+num, -num).
top(X, Y) :- mid(X, Z), leaf(Z, Y).
mid(X, Y) :- leaf(X, Y).
leaf(X, X).
)");
    auto sccs = call_sccs(a.prog);
    REQUIRE(sccs.size() == 3);
    std::map<std::string, size_t> pos;
    for (size_t i = 0; i < sccs.size(); ++i)
        for (const auto& p : sccs[i]) pos[p] = i;
    CHECK(pos["leaf/2"] < pos["mid/2"]);
    CHECK(pos["mid/2"] < pos["top/2"]);
}

TEST_CASE("mutually recursive predicates share one scc") {
    auto a = analyze(R"(
:- entry f(+nat, -num).
:- entry g(+nat, -num).
f(0, 1).
f(N, R) :- N > 0, N1 is N - 1, g(N1, R).
g(0, 1).
g(N, R) :- N > 0, N1 is N - 1, f(N1, R).
)");
    auto sccs = call_sccs(a.prog);
    bool found = false;
    for (const auto& s : sccs)
        if (s.size() == 2) found = true;
    CHECK(found);
    // Both cover nat fully and feed each other: not_fails survives.
    CHECK(a.aux.get("f/2").nf == NF::NotFails);
    CHECK(a.aux.get("g/2").nf == NF::NotFails);
}

TEST_CASE("dispatch on a constructor-valued input argument") {
    auto a = analyze(R"(
:- regtype cmp := lt | eq | gt.
:- entry pick(+cmp, +num, +num, -num).
pick(lt, X, _, X).
pick(eq, X, _, X).
pick(gt, _, Y, Y).
)");
    auto info = a.aux.get("pick/4");
    CHECK(info.exclusive);
    CHECK(info.det == Det::IsDet);
    CHECK(info.nf == NF::NotFails);
}
