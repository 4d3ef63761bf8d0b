#include "sra/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "sra/fixpoint.hpp"
#include "sra/frontend.hpp"
#include "sra/oracle.hpp"
#include "sra/report.hpp"

namespace sra {

namespace {

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return std::nullopt;
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// 0 on success; 2 printed to err on unreadable/parse/type errors.
int load_and_analyze(const std::string& path, std::ostream& err,
                     AnalysisResult& result) {
    auto text = slurp(path);
    if (!text) {
        err << "error: cannot read " << path << "\n";
        return 2;
    }
    Program prog;
    try {
        prog = parse_program(*text, path);
    } catch (const ParseError& e) {
        err << path << ":" << e.line << ":" << e.col << ": " << e.what() << "\n";
        return 2;
    }
    result = analyze(prog);
    if (!result.ok) {
        for (const auto& d : result.diags) err << path << ": " << d << "\n";
        return 2;
    }
    return 0;
}

size_t display_width(const std::string& s) {
    size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::string pad(const std::string& s, size_t w) {
    std::string out = s;
    size_t n = display_width(s);
    while (n++ < w) out += ' ';
    return out;
}

int cmd_analyze(const std::string& path, bool strict, const std::string& format,
                const std::string& output, std::ostream& out, std::ostream& err) {
    AnalysisResult result;
    if (int rc = load_and_analyze(path, err, result)) return rc;
    Report rep = build_report(result);
    std::string rendered =
        format == "structured" ? report_structured(rep) : report_text(rep);
    if (!output.empty()) {
        std::ofstream f(output, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << output << "\n";
            return 2;
        }
        f << rendered;
    } else {
        out << rendered;
    }
    if (strict && !rep.diagnostics.empty()) return 1;
    return 0;
}

int cmd_check(const std::string& path, long long budget, size_t samples,
              std::uint64_t seed, const std::string& resource, std::ostream& out,
              std::ostream& err) {
    AnalysisResult result;
    if (int rc = load_and_analyze(path, err, result)) return rc;

    std::mt19937_64 rng(seed);
    size_t total_violations = 0;
    for (size_t root : result.roots) {
        const AnalysisEntry& v = *result.versions[root];
        std::string pred = v.pred_key.substr(0, v.pred_key.find('/'));
        size_t arity = v.input_args.size() + v.output_args.size();

        size_t passes = 0, diverged = 0, printed = 0;
        for (size_t s = 0; s < samples; ++s) {
            std::vector<TermPtr> ins;
            bool gen_ok = true;
            for (size_t i = 0; i < v.call_schemas.size(); ++i) {
                TermPtr t = random_member(v.call_schemas[i]->symbol,
                                          result.grammar, budget, rng);
                if (!t) {
                    gen_ok = false;
                    break;
                }
                ins.push_back(t);
            }
            if (!gen_ok) {
                err << v.version << ": no member of an input type within budget "
                    << budget << "\n";
                return 2;
            }
            std::vector<TermPtr> args(arity);
            for (size_t i = 0; i < v.input_args.size(); ++i)
                args[v.input_args[i]] = ins[i];
            for (size_t i = 0; i < v.output_args.size(); ++i)
                args[v.output_args[i]] = mk_var("_Out" + std::to_string(i));
            TermPtr goal = args.empty() ? mk_atom(pred)
                                        : mk_comp(pred, std::move(args));

            ConcreteMeasure m = run_goal(result.prog, goal, result.resources);
            if (!m.valid) {
                ++diverged;
                continue;
            }
            auto sizes = measured_sizes(v, ins, result.grammar);
            Verdict verdict = check_bounds(m, v, sizes, resource);
            if (verdict.pass) {
                ++passes;
            } else {
                total_violations += verdict.violations.size();
                for (const auto& viol : verdict.violations)
                    if (printed < 10) {
                        out << "  sample " << s << " " << term_str(goal) << ": "
                            << viol << "\n";
                        ++printed;
                    }
            }
        }
        out << v.version << ": " << passes << "/" << (samples - diverged)
            << " pass";
        if (diverged) out << ", " << diverged << " diverged";
        out << "\n";
    }
    return total_violations ? 1 : 0;
}

struct Golden {
    std::string benchmark, entry, order_lb, order_ub;
};

std::optional<Golden> parse_golden(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != "sra-golden 1") return std::nullopt;
    Golden g;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto sep = line.find(": ");
        if (sep == std::string::npos) return std::nullopt;
        std::string key = line.substr(0, sep), val = line.substr(sep + 2);
        if (key == "benchmark")
            g.benchmark = val;
        else if (key == "entry")
            g.entry = val;
        else if (key == "order_lb")
            g.order_lb = val;
        else if (key == "order_ub")
            g.order_ub = val;
        else
            return std::nullopt;
    }
    if (g.benchmark.empty() || g.entry.empty()) return std::nullopt;
    return g;
}

int cmd_corpus(const std::string& dir, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    std::vector<fs::path> programs;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.path().extension() == ".pl") programs.push_back(e.path());
    if (ec) {
        err << "error: cannot read directory " << dir << "\n";
        return 2;
    }
    if (programs.empty()) {
        err << "error: no programs in " << dir << "\n";
        return 2;
    }
    std::sort(programs.begin(), programs.end());

    struct Row {
        std::string name, lb, ub, glb, gub;
        bool match = false;
    };
    std::vector<Row> rows;
    for (const auto& p : programs) {
        fs::path gp = p;
        gp.replace_extension(".golden");
        auto gtext = slurp(gp.string());
        if (!gtext) {
            err << "error: missing golden file " << gp.string() << "\n";
            return 2;
        }
        auto golden = parse_golden(*gtext);
        if (!golden) {
            err << "error: malformed golden file " << gp.string() << "\n";
            return 2;
        }
        Row row;
        row.name = golden->benchmark;
        row.glb = golden->order_lb;
        row.gub = golden->order_ub;

        AnalysisResult result;
        if (int rc = load_and_analyze(p.string(), err, result)) return rc;
        Report rep = build_report(result);
        const VersionReport* vr = nullptr;
        for (const auto& cand : rep.versions)
            if (cand.version == golden->entry) vr = &cand;
        if (!vr) {
            row.lb = row.ub = "(missing " + golden->entry + ")";
        } else {
            for (const auto& [name, bp] : vr->resources)
                if (name == "steps") {
                    row.lb = bp.lb_order;
                    row.ub = bp.ub_order;
                }
        }
        row.match = row.lb == row.glb && row.ub == row.gub;
        rows.push_back(std::move(row));
    }

    size_t wn = 9, wo = 8;
    for (const auto& r : rows) {
        wn = std::max(wn, display_width(r.name));
        for (const auto* s : {&r.lb, &r.ub, &r.glb, &r.gub})
            wo = std::max(wo, display_width(*s));
    }
    out << pad("benchmark", wn + 2) << pad("LB", wo + 2) << pad("UB", wo + 2)
        << pad("want LB", wo + 2) << pad("want UB", wo + 2) << "match\n";
    size_t mismatches = 0;
    for (const auto& r : rows) {
        out << pad(r.name, wn + 2) << pad(r.lb, wo + 2) << pad(r.ub, wo + 2)
            << pad(r.glb, wo + 2) << pad(r.gub, wo + 2)
            << (r.match ? "yes" : "NO") << "\n";
        if (!r.match) ++mismatches;
    }
    out << rows.size() << " benchmarks, " << mismatches << " mismatched\n";
    return mismatches ? 1 : 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"size, cardinality and resource bound analysis"};
    app.require_subcommand(1);

    std::string path, output, format = "text", resource, dir;
    bool strict = false;
    long long budget = 8;
    size_t samples = 100;
    std::uint64_t seed = 1;

    auto* a = app.add_subcommand("analyze", "analyze a program and report bounds");
    a->add_option("file", path)->required();
    a->add_flag("--strict", strict, "exit 1 when diagnostics are present");
    a->add_option("--format", format, "text|structured")
        ->check(CLI::IsMember({"text", "structured"}));
    a->add_option("--output", output, "write the report to a file");

    auto* c = app.add_subcommand("check", "test inferred bounds against runs");
    c->add_option("file", path)->required();
    c->add_option("--budget", budget, "per-argument size budget");
    c->add_option("--samples", samples, "inputs per entry");
    c->add_option("--seed", seed, "generator seed");
    c->add_option("--resource", resource, "check one resource (or solutions)");

    auto* k = app.add_subcommand("corpus", "compare a corpus against goldens");
    k->add_option("dir", dir)->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    if (a->parsed()) return cmd_analyze(path, strict, format, output, out, err);
    if (c->parsed()) return cmd_check(path, budget, samples, seed, resource, out, err);
    return cmd_corpus(dir, out, err);
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace sra
