#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sra/frontend.hpp"
#include "sra/report.hpp"

using namespace sra;

namespace {

Report report_for(const std::string& text) {
    AnalysisResult r = analyze(parse_program(text));
    REQUIRE(r.ok);
    return build_report(r);
}

const VersionReport& find(const Report& rep, const std::string& version) {
    for (const auto& v : rep.versions)
        if (v.version == version) return v;
    REQUIRE(false);
    static VersionReport dummy;
    return dummy;
}

const BoundPair& res(const VersionReport& v, const std::string& name) {
    for (const auto& [n, bp] : v.resources)
        if (n == name) return bp;
    REQUIRE(false);
    static BoundPair dummy;
    return dummy;
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

}  // namespace

TEST_CASE("two list arguments read with subscripts, one without") {
    AnalysisResult r = analyze(parse_program(kAppend));
    const AnalysisEntry* v = find_version(r, "append/3#1");
    REQUIRE(v);
    auto names = pretty_names(*v);
    CHECK(names.at(v->inputs[0]) == "α1");
    CHECK(names.at(v->inputs[1]) == "β1");
    CHECK(names.at(v->inputs[2]) == "γ1");
    CHECK(names.at(v->inputs[3]) == "δ1");
    CHECK(names.at(v->inputs[4]) == "α2");
    CHECK(names.at(v->inputs[5]) == "β2");

    AnalysisResult r2 = analyze(parse_program(kListFact));
    const AnalysisEntry* lf = find_version(r2, "listfact/2#1");
    REQUIRE(lf);
    auto n2 = pretty_names(*lf);
    CHECK(n2.at(lf->inputs[0]) == "α");
    CHECK(n2.at(lf->inputs[1]) == "β");
    CHECK(n2.at(lf->inputs[2]) == "γ");
    CHECK(n2.at(lf->inputs[3]) == "δ");

    const AnalysisEntry* fa = find_version(r2, "fact/2#1");
    REQUIRE(fa);
    auto n3 = pretty_names(*fa);
    CHECK(n3.at(fa->inputs[0]) == "μ");
    CHECK(n3.at(fa->inputs[1]) == "ν");
}

TEST_CASE("orders render in table style") {
    Report rep = report_for(kListFact);
    const VersionReport& lf = find(rep, "listfact/2#1");
    const BoundPair& steps = res(lf, "steps");
    CHECK(steps.ub_order == "βδ");
    CHECK(steps.lb_order == "αγ");
    const VersionReport& fa = find(rep, "fact/2#1");
    CHECK(res(fa, "steps").ub_order == "ν");
    CHECK(res(fa, "steps").lb_order == "μ");
    CHECK(fa.solutions.ub == "1");
    CHECK(fa.solutions.lb == "1");
}

TEST_CASE("exponential orders keep their base") {
    Report rep = report_for(kFib);
    const VersionReport& v = find(rep, "fib/2#1");
    CHECK(res(v, "steps").ub_order == "φ^ν");
    CHECK(res(v, "steps").lb_order == "φ^μ");
    CHECK(v.nf == "not_fails");
    CHECK(v.det == "is_det");
}

TEST_CASE("append output schema reads as a sized type") {
    Report rep = report_for(kAppend);
    const VersionReport& v = find(rep, "append/3#1");
    REQUIRE(v.outputs.size() == 1);
    // length adds, element bounds join
    CHECK(v.outputs[0].find("listnum^(") == 0);
    CHECK(v.outputs[0].find("α1+α2") != std::string::npos);
    CHECK(v.outputs[0].find("β1+β2") != std::string::npos);
    CHECK(v.outputs[0].find("num^(") != std::string::npos);
}

TEST_CASE("structured report round-trips") {
    for (const char* text : {kAppend, kListFact, kFib}) {
        Report rep = report_for(text);
        std::string doc = report_structured(rep);
        auto back = parse_structured(doc);
        REQUIRE(back.has_value());
        CHECK(*back == rep);
        // and re-emission is identical
        CHECK(report_structured(*back) == doc);
    }
}

TEST_CASE("text and structured renderings carry the same fields") {
    Report rep = report_for(kListFact);
    std::string text = report_text(rep);
    std::string doc = report_structured(rep);
    for (const auto& v : rep.versions) {
        CHECK(text.find(v.version) != std::string::npos);
        CHECK(doc.find(v.version) != std::string::npos);
        CHECK(text.find(v.solutions.ub) != std::string::npos);
        CHECK(doc.find(v.solutions.ub) != std::string::npos);
        for (const auto& [name, bp] : v.resources) {
            CHECK(text.find(bp.ub_order) != std::string::npos);
            CHECK(doc.find(bp.ub_order) != std::string::npos);
        }
    }
}

TEST_CASE("malformed structured documents are rejected") {
    CHECK(!parse_structured("").has_value());
    CHECK(!parse_structured("sra-report 2\n").has_value());
    CHECK(!parse_structured("sra-report 1\npattern: orphan\n").has_value());
    Report rep = report_for(kAppend);
    std::string doc = report_structured(rep);
    CHECK(parse_structured(doc).has_value());
}
