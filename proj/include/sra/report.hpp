#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sra/fixpoint.hpp"

namespace sra {

// Rendered analysis results. Every field is a plain string so the structured
// emission round-trips by simple equality.

struct BoundPair {
    std::string lb = "(none)", ub = "(none)";          // closed forms
    std::string lb_order = "(none)", ub_order = "(none)";
    bool lb_exact = false, ub_exact = false;
    bool operator==(const BoundPair&) const = default;
};

struct VersionReport {
    std::string version;  // pred/arity#N
    std::string pattern;  // pretty call pattern with size-variable names
    std::string nf, det;
    BoundPair solutions;
    std::vector<std::pair<std::string, BoundPair>> resources;
    std::vector<std::string> outputs;  // sized-type rendering per output arg
    bool operator==(const VersionReport&) const = default;
};

struct Report {
    std::vector<VersionReport> versions;
    std::vector<std::string> diagnostics;
    bool operator==(const Report&) const = default;
};

// Size-variable display names for one analysis version, keyed by the internal
// formal variable. Numeric arguments read (μ,ν); a flat list reads (α,β) for
// its length and (γ,δ) for its element bound; deeper structures take a1/b1,
// a2/b2, ... per slot. Families used by several arguments gain subscripts.
std::map<std::string, std::string> pretty_names(const AnalysisEntry& v);

// Subscripted family letters (formal -> bare letter) for the names above;
// empty for versions whose arguments need no subscripts.
std::map<std::string, std::string> pretty_families(const AnalysisEntry& v);

// Complexity-order rendering: products juxtaposed with superscript powers
// (βδ, β²), k^x exponentials, φ^x for the golden-ratio recurrence.
std::string order_str(const SEP& order,
                      const std::map<std::string, std::string>& names);

// As above, but a subscripted family whose sole member occurs in the order
// is rendered as the bare letter (β1 alone reads β; β1β2 keeps subscripts).
std::string order_str(const SEP& order,
                      const std::map<std::string, std::string>& names,
                      const std::map<std::string, std::string>& families);

Report build_report(const AnalysisResult& r);

std::string report_text(const Report& rep);
std::string report_structured(const Report& rep);
std::optional<Report> parse_structured(const std::string& text);

}  // namespace sra
