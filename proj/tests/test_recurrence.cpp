#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sra/recurrence.hpp"

using namespace sra;

namespace {

Inequation eq(const std::string& fn, SEP rhs, std::vector<DomCon> guard = {},
              bool lower = false) {
    Inequation e;
    e.fn = fn;
    e.lower = lower;
    e.rhs = std::move(rhs);
    e.guard = std::move(guard);
    return e;
}

DomCon deq(const std::string& v, long long k) { return {v, DomCon::Rel::Eq, Rat(k)}; }
DomCon dgt(const std::string& v, long long k) { return {v, DomCon::Rel::Gt, Rat(k)}; }

SEP self(const std::string& fn, std::vector<SEP> args) {
    auto bar = fn.find('|');
    return se_call(fn.substr(0, bar), fn.substr(bar + 1), std::move(args));
}

std::map<std::string, Rat> asg(std::initializer_list<std::pair<std::string, long long>> xs) {
    std::map<std::string, Rat> m;
    for (auto& [k, v] : xs) m[k] = Rat(v);
    return m;
}

}  // namespace

TEST_CASE("linear descent solves to the input plus one") {
    // r(0) <= 1 ; r(b) <= 1 + r(b-1) when b > 0.
    EqSystem s;
    s.fn = "r|ub";
    s.inputs = {"b"};
    s.lows = {{"b", Rat(0)}};
    s.eqs.push_back(eq("r|ub", se_int(1), {deq("b", 0)}));
    s.eqs.push_back(eq("r|ub", se_add2(se_int(1), self("r|ub", {se_sub(se_var("b"), se_int(1))})),
                       {dgt("b", 0)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    CHECK(se_str(se_canon(cf.cases[0].expr)) == "b+1");
    auto v = evaluate(cf, asg({{"b", 7}}));
    REQUIRE(v.has_value());
    CHECK(!v->inf);
    CHECK(v->q == Rat(8));
}

TEST_CASE("quadratic descent via first-order sum") {
    // f(0) = 0 ; f(n) = n + f(n-1): sum = n(n+1)/2.
    EqSystem s;
    s.fn = "f|ub";
    s.inputs = {"n"};
    s.lows = {{"n", Rat(0)}};
    s.eqs.push_back(eq("f|ub", se_int(0), {deq("n", 0)}));
    s.eqs.push_back(eq("f|ub", se_add2(se_var("n"), self("f|ub", {se_sub(se_var("n"), se_int(1))})),
                       {dgt("n", 0)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    for (long long n : {0, 1, 2, 5, 9}) {
        auto v = evaluate(cf, asg({{"n", n}}));
        REQUIRE(v.has_value());
        CHECK(v->q == Rat(n * (n + 1) / 2));
    }
}

TEST_CASE("step two descent checks both residues") {
    // f(0) = 2 ; f(1) = 3 ; f(n) = 2 + f(n-2) if n > 1: both residue classes
    // agree on the single polynomial n + 2.
    EqSystem s;
    s.fn = "f|ub";
    s.inputs = {"n"};
    s.lows = {{"n", Rat(0)}};
    s.eqs.push_back(eq("f|ub", se_int(2), {deq("n", 0)}));
    s.eqs.push_back(eq("f|ub", se_int(3), {deq("n", 1)}));
    s.eqs.push_back(eq("f|ub", se_add2(se_int(2), self("f|ub", {se_sub(se_var("n"), se_int(2))})),
                       {dgt("n", 1)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    CHECK(se_str(se_canon(cf.cases[0].expr)) == "n+2");
    auto v4 = evaluate(cf, asg({{"n", 4}}));
    auto v5 = evaluate(cf, asg({{"n", 5}}));
    REQUIRE(v4.has_value());
    REQUIRE(v5.has_value());
    CHECK(v4->q == Rat(6));
    CHECK(v5->q == Rat(7));
}

TEST_CASE("step two descent rejects inconsistent residues") {
    // f(0) = 0 ; f(1) = 5 ; f(n) = 1 + f(n-2): no single polynomial matches.
    EqSystem s;
    s.fn = "f|ub";
    s.inputs = {"n"};
    s.lows = {{"n", Rat(0)}};
    s.eqs.push_back(eq("f|ub", se_int(0), {deq("n", 0)}));
    s.eqs.push_back(eq("f|ub", se_int(5), {deq("n", 1)}));
    s.eqs.push_back(eq("f|ub", se_add2(se_int(1), self("f|ub", {se_sub(se_var("n"), se_int(2))})),
                       {dgt("n", 1)}));
    ClosedForm cf = solve(s);
    CHECK(!cf.exact);
    CHECK(cf.pattern == "fallback");
    CHECK(se_is_inf(cf.cases[0].expr));
}

TEST_CASE("geometric growth with constant addend") {
    // h(0) = 1 ; h(n) = 1 + 2 h(n-1): closed form 2^(n+1) - 1.
    EqSystem s;
    s.fn = "h|ub";
    s.inputs = {"n"};
    s.lows = {{"n", Rat(0)}};
    s.eqs.push_back(eq("h|ub", se_int(1), {deq("n", 0)}));
    s.eqs.push_back(
        eq("h|ub",
           se_add2(se_int(1), se_scale(Rat(2), self("h|ub", {se_sub(se_var("n"), se_int(1))}))),
           {dgt("n", 0)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    CHECK(cf.pattern == "P2");
    for (long long n : {0, 1, 2, 3, 10}) {
        auto v = evaluate(cf, asg({{"n", n}}));
        REQUIRE(v.has_value());
        CHECK(v->q == Rat((1LL << (n + 1)) - 1));
    }
    // Matches direct unrolling of the system.
    SystemSet set;
    set[s.fn] = s;
    auto u = unroll(set, s.fn, asg({{"n", 3}}));
    REQUIRE(u.has_value());
    CHECK(u->q == Rat(15));
}

TEST_CASE("two-step linear recurrences iterate exactly") {
    // fib-style: f(0)=f(1)=1 ; f(n) = f(n-1) + f(n-2) + 1.
    EqSystem s;
    s.fn = "f|ub";
    s.inputs = {"n"};
    s.lows = {{"n", Rat(0)}};
    s.eqs.push_back(eq("f|ub", se_int(1), {deq("n", 0)}));
    s.eqs.push_back(eq("f|ub", se_int(1), {deq("n", 1)}));
    SEP n1 = self("f|ub", {se_sub(se_var("n"), se_int(1))});
    SEP n2 = self("f|ub", {se_sub(se_var("n"), se_int(2))});
    s.eqs.push_back(eq("f|ub", se_add({se_int(1), n1, n2}), {dgt("n", 1)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    CHECK(cf.pattern == "P3");
    // 1,1,3,5,9,15,25,...
    long long want[] = {1, 1, 3, 5, 9, 15, 25};
    for (int n = 0; n < 7; ++n) {
        auto v = evaluate(cf, asg({{"n", n}}));
        REQUIRE(v.has_value());
        CHECK(v->q == Rat(want[n]));
    }
    SystemSet set;
    set[s.fn] = s;
    for (int n = 0; n < 7; ++n) {
        auto u = unroll(set, s.fn, asg({{"n", n}}));
        REQUIRE(u.has_value());
        CHECK(u->q == Rat(want[n]));
    }
}

TEST_CASE("multiple decremented slots bound by their minimum") {
    // z(a,b) = 1 at a=0; 1 at a>0,b=0; 1 + z(a-1,b-1) otherwise.
    EqSystem s;
    s.fn = "z|ub";
    s.inputs = {"a", "b"};
    s.lows = {{"a", Rat(0)}, {"b", Rat(0)}};
    s.eqs.push_back(eq("z|ub", se_int(1), {deq("a", 0)}));
    s.eqs.push_back(eq("z|ub", se_int(1), {dgt("a", 0), deq("b", 0)}));
    s.eqs.push_back(
        eq("z|ub",
           se_add2(se_int(1), self("z|ub", {se_sub(se_var("a"), se_int(1)),
                                            se_sub(se_var("b"), se_int(1))})),
           {dgt("a", 0), dgt("b", 0)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.pattern == "P-multi");
    CHECK(se_str(se_canon(cf.cases[0].expr)) == "min(a,b)+1");
    auto v = evaluate(cf, asg({{"a", 5}, {"b", 3}}));
    REQUIRE(v.has_value());
    CHECK(v->q == Rat(4));
}

TEST_CASE("irrelevant call arguments unify recursive cases") {
    // i(n,e) = 1 at n=0; max(1 + i(n-1, e), 1 + i(n-1, x)) at n>0 where the
    // second argument never feeds a guard or the result: both collapse.
    EqSystem s;
    s.fn = "i|ub";
    s.inputs = {"n", "e"};
    s.lows = {{"n", Rat(0)}};
    SEP c1 = se_add2(se_int(1), self("i|ub", {se_sub(se_var("n"), se_int(1)), se_var("e")}));
    SEP c2 = se_add2(se_int(1),
                     self("i|ub", {se_sub(se_var("n"), se_int(1)), se_var("x")}));
    s.eqs.push_back(eq("i|ub", se_int(1), {deq("n", 0)}));
    s.eqs.push_back(eq("i|ub", se_max({c1, c2}), {dgt("n", 0)}));
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    CHECK(se_str(se_canon(cf.cases[0].expr)) == "n+1");
}

TEST_CASE("mutual pair reduces by substitution") {
    // f(0)=1 ; f(n) = 1 + g(n-1) ; g(0)=1 ; g(m) = 1 + f(m-1).
    // Substitution yields f(1) = 2 and f(n) = 2 + f(n-2): f(n) = n + 1.
    EqSystem f, g;
    f.fn = "f|ub";
    f.inputs = {"n"};
    f.lows = {{"n", Rat(0)}};
    f.eqs.push_back(eq("f|ub", se_int(1), {deq("n", 0)}));
    f.eqs.push_back(
        eq("f|ub", se_add2(se_int(1), se_call("g", "ub", {se_sub(se_var("n"), se_int(1))})),
           {dgt("n", 0)}));
    g.fn = "g|ub";
    g.inputs = {"m"};
    g.lows = {{"m", Rat(0)}};
    g.eqs.push_back(eq("g|ub", se_int(1), {deq("m", 0)}));
    g.eqs.push_back(
        eq("g|ub", se_add2(se_int(1), se_call("f", "ub", {se_sub(se_var("m"), se_int(1))})),
           {dgt("m", 0)}));
    SystemSet scc;
    scc[f.fn] = f;
    scc[g.fn] = g;
    ClosedForm cf = solve_system(f, scc, {});
    for (int n = 0; n < 7; ++n) {
        auto v = evaluate(cf, asg({{"n", n}}));
        REQUIRE(v.has_value());
        CHECK(v->q == Rat(n + 1));
        auto u = unroll(scc, f.fn, asg({{"n", n}}));
        REQUIRE(u.has_value());
        CHECK(u->q == Rat(n + 1));
    }
}

TEST_CASE("already solved callees are inlined") {
    // f(n) = 1 at n=0, (g applied at n) + f(n-1) otherwise, where g's closed
    // form is m+2: f(n) = sum_{i=1..n} (i+2) + 1.
    std::map<std::string, ClosedForm> solved;
    ClosedForm g;
    g.inputs = {"m"};
    g.cases.push_back({{}, se_add2(se_var("m"), se_int(2))});
    solved["g|ub"] = g;
    EqSystem s;
    s.fn = "f|ub";
    s.inputs = {"n"};
    s.lows = {{"n", Rat(0)}};
    s.eqs.push_back(eq("f|ub", se_int(1), {deq("n", 0)}));
    s.eqs.push_back(eq("f|ub", se_add2(se_call("g", "ub", {se_var("n")}),
                                       self("f|ub", {se_sub(se_var("n"), se_int(1))})),
                       {dgt("n", 0)}));
    SystemSet one;
    one[s.fn] = s;
    ClosedForm cf = solve_system(s, one, solved);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    for (long long n : {0, 1, 2, 5}) {
        long long want = 1;
        for (long long i = 1; i <= n; ++i) want += i + 2;
        auto v = evaluate(cf, asg({{"n", n}}));
        REQUIRE(v.has_value());
        CHECK(v->q == Rat(want));
    }
}

TEST_CASE("normalize eliminates intermediates and rejects cycles") {
    EqSystem s;
    s.fn = "f|ub";
    s.inputs = {"n"};
    s.eqs.push_back(eq("t", se_add2(se_var("n"), se_int(1))));
    s.eqs.push_back(eq("u", se_scale(Rat(2), se_var("t"))));
    s.eqs.push_back(eq("f|ub", se_add2(se_var("u"), se_int(3))));
    EqSystem n = normalize(s);
    REQUIRE(n.eqs.size() == 1);
    CHECK(se_str(se_canon(n.eqs[0].rhs)) == "2*n+5");

    EqSystem c;
    c.fn = "f|ub";
    c.eqs.push_back(eq("a", se_var("b")));
    c.eqs.push_back(eq("b", se_var("a")));
    c.eqs.push_back(eq("f|ub", se_var("a")));
    CHECK_THROWS_AS(normalize(c), std::runtime_error);
}

TEST_CASE("guarded constant calls resolve through base cases") {
    // e(b) with nested self-application at a constant: the inner call
    // e(0) must resolve to its base value 1 before pattern matching.
    EqSystem s;
    s.fn = "e|lb";
    s.inputs = {"b"};
    s.lows = {{"b", Rat(0)}};
    s.eqs.push_back(eq("e|lb", se_int(1), {deq("b", 0)}, true));
    s.eqs.push_back(eq("e|lb",
                       se_add({se_int(2), self("e|lb", {se_int(0)}),
                               self("e|lb", {se_sub(se_var("b"), se_int(1))})}),
                       {dgt("b", 0)}, true));
    s.lower = true;
    ClosedForm cf = solve(s);
    REQUIRE(cf.cases.size() == 1);
    CHECK(cf.exact);
    // f(b) = 3b + 1.
    auto v = evaluate(cf, asg({{"b", 4}}));
    REQUIRE(v.has_value());
    CHECK(v->q == Rat(13));
}

TEST_CASE("lower fallbacks stay at zero and upper at infinity") {
    EqSystem s;
    s.fn = "w|ub";
    s.inputs = {"n"};
    // Two different recursive cases that cannot merge.
    s.eqs.push_back(eq("w|ub", se_int(1), {deq("n", 0)}));
    s.eqs.push_back(eq("w|ub", se_mul2(self("w|ub", {se_sub(se_var("n"), se_int(1))}),
                                       self("w|ub", {se_sub(se_var("n"), se_int(2))})),
                       {dgt("n", 1)}));
    ClosedForm up = solve(s);
    CHECK(!up.exact);
    CHECK(se_is_inf(up.cases[0].expr));
    s.fn = "w|lb";
    s.lower = true;
    for (auto& e : s.eqs) {
        e.lower = true;
        e.fn = "w|lb";
    }
    s.eqs[1].rhs = se_mul2(self("w|lb", {se_sub(se_var("n"), se_int(1))}),
                           self("w|lb", {se_sub(se_var("n"), se_int(2))}));
    ClosedForm lo = solve(s);
    CHECK(!lo.exact);
    auto v = evaluate(lo, asg({{"n", 3}}));
    REQUIRE(v.has_value());
    CHECK(v->q == Rat(0));
}

TEST_CASE("orders strip constants and keep dominant terms") {
    std::map<std::string, Rat> lows{{"a", Rat(0)}, {"b", Rat(0)}};
    CHECK(se_str(order_of(se_add2(se_var("b"), se_int(1)), lows)) == "b");
    SEP quad = se_add({se_mul2(se_var("b"), se_var("b")), se_scale(Rat(3), se_var("b")),
                       se_int(2)});
    CHECK(se_str(order_of(quad, lows)) == "b^2");
    SEP expo = se_add2(se_scale(Rat(2), se_pow(Rat(2), se_add2(se_var("b"), se_int(1)))),
                       se_mul2(se_var("b"), se_var("b")));
    CHECK(se_str(order_of(expo, lows)) == "2^b");
    SEP mn = se_add2(se_min({se_var("a"), se_var("b")}), se_int(1));
    CHECK(se_str(order_of(mn, lows)) == "min(a,b)");
    CHECK(se_str(order_of(se_int(7), lows)) == "1");
    CHECK(se_is_inf(order_of(se_inf(), lows)));
}

TEST_CASE("piecewise orders pick the dominant case") {
    ClosedForm cf;
    cf.inputs = {"a", "g"};
    cf.cases.push_back({{deq("a", 0)}, se_int(1)});
    cf.cases.push_back({{dgt("a", 0)}, se_add2(se_mul2(se_var("a"), se_var("g")), se_var("a"))});
    std::map<std::string, Rat> lows{{"a", Rat(0)}, {"g", Rat(0)}};
    CHECK(se_str(order_of_form(cf, lows)) == "a*g");
}

TEST_CASE("closed form instantiation respects guard decidability") {
    ClosedForm cf;
    cf.inputs = {"n"};
    cf.cases.push_back({{deq("n", 0)}, se_int(1)});
    cf.cases.push_back({{dgt("n", 0)}, se_add2(se_var("n"), se_int(1))});
    // Constant argument picks its case exactly.
    SEP at3 = closed_form_apply(cf, cf.inputs, {se_int(3)}, false);
    CHECK(se_str(se_canon(at3)) == "4");
    // Symbolic argument folds to max for an upper bound.
    SEP atv = closed_form_apply(cf, cf.inputs, {se_var("m")}, false);
    CHECK(se_canon(atv)->kind == SymExpr::Kind::Max);
    SEP atl = closed_form_apply(cf, cf.inputs, {se_var("m")}, true);
    CHECK(se_canon(atl)->kind == SymExpr::Kind::Min);
}
