#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sra/fixpoint.hpp"
#include "sra/frontend.hpp"

using namespace sra;

namespace {

AnalysisResult run(const std::string& text) {
    AnalysisResult r = analyze(parse_program(text));
    REQUIRE(r.ok);
    return r;
}

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

const char* kListFact = R"(
:- regtype listnum := [] | [num|listnum].
:- entry fact(+nat, -num).
:- entry listfact(+listnum, -listnum).
fact(0, 1).
fact(N, F) :- N > 0, N1 is N - 1, fact(N1, F1), F is N * F1.
listfact([], []).
listfact([E|Es], [F|Fs]) :- fact(E, F), listfact(Es, Fs).
)";

const char* kFib = R"(
:- entry fib(+nat, -num).
fib(0, 0).
fib(1, 1).
fib(N, F) :- N > 1, N1 is N - 1, N2 is N - 2, fib(N1, F1), fib(N2, F2), F is F1 + F2.
)";

const char* kHanoi = R"(
:- regtype listnum := [] | [num|listnum].
:- entry hanoi(+num, -listnum).
hanoi(0, []).
hanoi(N, M) :- N > 0, N1 is N - 1, hanoi(N1, M1), hanoi(N1, M2), app(M1, M2, M).
:- entry app(+listnum, +listnum, -listnum).
app([], L, L).
app([H|T], L, [H|R]) :- app(T, L, R).
)";

const char* kEvenOdd = R"(
:- entry even(+nat, -num).
:- entry odd(+nat, -num).
even(0, 1).
even(N, R) :- N > 0, N1 is N - 1, odd(N1, R).
odd(0, 0).
odd(N, R) :- N > 0, N1 is N - 1, even(N1, R).
)";

}  // namespace

TEST_CASE("append analyzes to linear step bounds at the root version") {
    AnalysisResult r = run(kAppend);
    REQUIRE(r.roots.size() == 1);
    const AnalysisEntry& v = *r.versions[r.roots[0]];
    CHECK(v.version == "append/3#1");
    CHECK(v.stable);

    const ClosedForm& ub = v.forms.at(slot_res("steps", false));
    CHECK(num(evaluate(ub, asg(v, {2, 2, 1, 3, 1, 1, 3, 3}))) == 3);
    CHECK(ub.exact);
    CHECK(se_str(order_of_form(ub, v.lows)) == v.inputs[1]);
    const ClosedForm& lb = v.forms.at(slot_res("steps", true));
    CHECK(se_str(order_of_form(lb, v.lows)) == v.inputs[0]);
    CHECK(num(evaluate(v.forms.at(slot_sol(false)), asg(v, {2, 2, 1, 3, 1, 1, 3, 3}))) == 1);
}

TEST_CASE("cross-group calls inline the callee's solved forms") {
    AnalysisResult r = run(kListFact);
    const AnalysisEntry* fact = find_version(r, "fact/2#1");
    const AnalysisEntry* lf = find_version(r, "listfact/2#1");
    REQUIRE(fact);
    REQUIRE(lf);

    // fact on an exact input n: n+1 clause entries
    CHECK(num(evaluate(fact->forms.at(slot_res("steps", false)), asg(*fact, {3, 3}))) == 4);
    CHECK(num(evaluate(fact->forms.at(slot_res("steps", true)), asg(*fact, {3, 3}))) == 4);

    // listfact of k elements each bounded by d: k*(d+2)+1 steps
    const ClosedForm& ub = lf->forms.at(slot_res("steps", false));
    CHECK(num(evaluate(ub, asg(*lf, {3, 3, 2, 2}))) == 13);
    // order: upper linear in length times element bound
    SEP ord = order_of_form(ub, lf->lows);
    std::string os = se_str(ord);
    CHECK(os.find(lf->inputs[1]) != std::string::npos);
    CHECK(os.find(lf->inputs[3]) != std::string::npos);
    const ClosedForm& lbf = lf->forms.at(slot_res("steps", true));
    std::string ls = se_str(order_of_form(lbf, lf->lows));
    CHECK(ls.find(lf->inputs[0]) != std::string::npos);
    CHECK(ls.find(lf->inputs[2]) != std::string::npos);

    // output sizes: factorial values are unbounded above but at least 1
    CHECK(num(evaluate(lf->forms.at(slot_out(0, 0, false)), asg(*lf, {3, 3, 2, 2}))) == 3);
}

TEST_CASE("fib: deterministic refinement rescues the solution system") {
    AnalysisResult r = run(kFib);
    const AnalysisEntry* v = find_version(r, "fib/2#1");
    REQUIRE(v);
    // solutions (1,1): product recurrences fall back, nf/det refine
    CHECK(num(evaluate(v->forms.at(slot_sol(false)), asg(*v, {5, 5}))) == 1);
    CHECK(num(evaluate(v->forms.at(slot_sol(true)), asg(*v, {5, 5}))) == 1);

    // steps follow the fibonacci recurrence: t(n) = t(n-1) + t(n-2) + 1
    // t(0)=t(1)=1 -> 1,1,3,5,9,15,25
    const ClosedForm& ub = v->forms.at(slot_res("steps", false));
    CHECK(num(evaluate(ub, asg(*v, {0, 0}))) == 1);
    CHECK(num(evaluate(ub, asg(*v, {4, 4}))) == 9);
    CHECK(num(evaluate(ub, asg(*v, {6, 6}))) == 25);
    const ClosedForm& lb = v->forms.at(slot_res("steps", true));
    CHECK(num(evaluate(lb, asg(*v, {6, 6}))) == 25);
    // exponential order with the golden-ratio base kept symbolic
    SEP ord = order_of_form(ub, v->lows);
    CHECK(ord->kind == SymExpr::Kind::LinRec);
}

TEST_CASE("hanoi: failing guard freezes the lower bound at the head cost") {
    AnalysisResult r = run(kHanoi);
    const AnalysisEntry* v = find_version(r, "hanoi/2#1");
    REQUIRE(v);
    // num entry: negatives are never covered, so nf = fails and lower bounds freeze
    const ClosedForm& lb = v->forms.at(slot_res("steps", true));
    CHECK(num(evaluate(lb, asg(*v, {5, 5}))) == 1);
    // upper: 2^(n+1)-1 own entries plus the append work on the move lists
    const ClosedForm& ub = v->forms.at(slot_res("steps", false));
    CHECK(num(evaluate(ub, asg(*v, {0, 0}))) == 1);
    // exact powers: hanoi(1) = 1 + 2*hanoi(0) + app([],..) = 4
    CHECK(num(evaluate(ub, asg(*v, {1, 1}))) == 4);
    // solution lower bound identically zero under nf = fails
    const ClosedForm& sl = v->forms.at(slot_sol(true));
    REQUIRE(sl.cases.size() == 1);
    CHECK(se_equal(sl.cases[0].expr, se_int(0)));
}

TEST_CASE("mutual recursion solves through substitution") {
    AnalysisResult r = run(kEvenOdd);
    const AnalysisEntry* ev = find_version(r, "even/2#1");
    REQUIRE(ev);
    const ClosedForm& ub = ev->forms.at(slot_res("steps", false));
    // each level costs one entry: n+1 total
    CHECK(num(evaluate(ub, asg(*ev, {4, 4}))) == 5);
    CHECK(num(evaluate(ub, asg(*ev, {7, 7}))) == 8);
    const ClosedForm& lb = ev->forms.at(slot_res("steps", true));
    CHECK(num(evaluate(lb, asg(*ev, {4, 4}))) == 5);
}

TEST_CASE("canonical call patterns are renaming-invariant and split on constants") {
    std::string a = canonical_call_pattern("p/2", {"listnum"}, {});
    std::string b = canonical_call_pattern("p/2", {"listnum"}, {});
    CHECK(a == b);
    std::string c = canonical_call_pattern("p/2", {"listnum"}, {{0, Rat(3)}});
    CHECK(a != c);
    // order of constant classes does not matter
    std::string d1 = canonical_call_pattern("p/2", {"listnum"}, {{0, Rat(3)}, {1, Rat(3)}});
    std::string d2 = canonical_call_pattern("p/2", {"listnum"}, {{1, Rat(3)}, {0, Rat(3)}});
    CHECK(d1 == d2);
}

TEST_CASE("undefined callees are reported and bound to the defaults") {
    const char* text = R"(
:- regtype listnum := [] | [num|listnum].
:- entry p(+listnum, -listnum).
p(L, L) :- mystery(L).
)";
    AnalysisResult r = run(text);
    bool found = false;
    for (const auto& d : r.diags)
        if (d.find("undefined predicate mystery/1") != std::string::npos) found = true;
    CHECK(found);
    const AnalysisEntry* v = find_version(r, "p/2#1");
    REQUIRE(v);
    auto su = evaluate(v->forms.at(slot_sol(false)), asg(*v, {2, 2, 1, 1}));
    REQUIRE(su.has_value());
    CHECK(su->inf);
}

TEST_CASE("every version stabilizes within the iteration budget") {
    for (const char* prog : {kAppend, kListFact, kFib, kHanoi, kEvenOdd}) {
        AnalysisResult r = run(prog);
        for (const auto& v : r.versions) CHECK(v->stable);
        for (const auto& d : r.diags) CHECK(d.find("iteration cap") == std::string::npos);
    }
}

TEST_CASE("solved fixpoint is stable: re-solving changes nothing") {
    AnalysisResult r1 = run(kListFact);
    AnalysisResult r2 = run(kListFact);
    REQUIRE(r1.versions.size() == r2.versions.size());
    for (size_t i = 0; i < r1.versions.size(); ++i) {
        REQUIRE(r1.versions[i]->version == r2.versions[i]->version);
        for (const auto& [slot, cf] : r1.versions[i]->forms) {
            REQUIRE(r2.versions[i]->forms.count(slot));
            CHECK(closed_form_str(cf) == closed_form_str(r2.versions[i]->forms.at(slot)));
        }
    }
}
