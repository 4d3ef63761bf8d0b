#include "sra/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sra/recurrence.hpp"
#include "sra/sizedtypes.hpp"
#include "sra/symexpr.hpp"

namespace sra {

namespace {

std::string subscript(size_t i) { return std::to_string(i); }

std::string superscript(long long k) {
    static const char* digits[10] = {"⁰", "¹", "²", "³", "⁴",
                                     "⁵", "⁶", "⁷", "⁸", "⁹"};
    std::string s = std::to_string(k), out;
    for (char c : s)
        if (c >= '0' && c <= '9') out += digits[c - '0'];
    return out;
}

}  // namespace

namespace {

// names: formal -> display name.  families: formal -> bare family letter,
// present only for subscripted Greek families (orders drop the subscript
// when a family's sole representative appears).
void build_names(const AnalysisEntry& v, std::map<std::string, std::string>& out,
                 std::map<std::string, std::string>& families) {
    // slot counts and numeric flags per input argument
    size_t nargs = v.call_schemas.size();
    std::vector<std::vector<SlotInfo>> arg_slots(nargs);
    for (size_t j = 0; j < nargs; ++j) schema_slots(v.call_schemas[j], arg_slots[j]);

    enum class Fam { Num, FlatList, Nested };
    std::vector<Fam> fam(nargs);
    size_t n_num = 0, n_flat = 0;
    for (size_t j = 0; j < nargs; ++j) {
        const auto& s = arg_slots[j];
        if (s.size() == 1 && s[0].is_num) {
            fam[j] = Fam::Num;
            ++n_num;
        } else if ((s.size() == 2 && !s[0].is_num && s[1].is_num) ||
                   (s.size() == 1 && !s[0].is_num)) {
            fam[j] = Fam::FlatList;
            ++n_flat;
        } else {
            fam[j] = Fam::Nested;
        }
    }

    size_t base = 0, num_seen = 0, flat_seen = 0, nested_slot = 0;
    for (size_t j = 0; j < nargs; ++j) {
        const auto& s = arg_slots[j];
        for (size_t k = 0; k < s.size(); ++k) {
            std::string lo, hi, lo_fam, hi_fam;
            if (fam[j] == Fam::Num) {
                std::string sub = n_num > 1 ? subscript(num_seen + 1) : "";
                lo = "μ" + sub;
                hi = "ν" + sub;
                if (!sub.empty()) lo_fam = "μ", hi_fam = "ν";
            } else if (fam[j] == Fam::FlatList) {
                std::string sub = n_flat > 1 ? subscript(flat_seen + 1) : "";
                lo = (k == 0 ? "α" : "γ") + sub;
                hi = (k == 0 ? "β" : "δ") + sub;
                if (!sub.empty()) {
                    lo_fam = k == 0 ? "α" : "γ";
                    hi_fam = k == 0 ? "β" : "δ";
                }
            } else {
                std::string n = subscript(nested_slot + k + 1);
                lo = "a" + n;
                hi = "b" + n;
            }
            if (base + 2 * k + 1 < v.inputs.size()) {
                out[v.inputs[base + 2 * k]] = lo;
                out[v.inputs[base + 2 * k + 1]] = hi;
                if (!lo_fam.empty()) {
                    families[v.inputs[base + 2 * k]] = lo_fam;
                    families[v.inputs[base + 2 * k + 1]] = hi_fam;
                }
            }
        }
        if (fam[j] == Fam::Num) ++num_seen;
        if (fam[j] == Fam::FlatList) ++flat_seen;
        if (fam[j] == Fam::Nested) nested_slot += s.size();
        base += s.size() * 2;
    }
}

}  // namespace

std::map<std::string, std::string> pretty_names(const AnalysisEntry& v) {
    std::map<std::string, std::string> names, families;
    build_names(v, names, families);
    return names;
}

std::map<std::string, std::string> pretty_families(const AnalysisEntry& v) {
    std::map<std::string, std::string> names, families;
    build_names(v, names, families);
    return families;
}

namespace {

std::string pretty_var(const std::string& name,
                       const std::map<std::string, std::string>& names) {
    auto it = names.find(name);
    return it == names.end() ? name : it->second;
}

std::string order_factor(const SEP& e,
                         const std::map<std::string, std::string>& names,
                         bool paren_compound);

std::string order_render(const SEP& e,
                         const std::map<std::string, std::string>& names) {
    switch (e->kind) {
        case SymExpr::Kind::Const: return e->c.str();
        case SymExpr::Kind::Inf: return "∞";
        case SymExpr::Kind::Var: return pretty_var(e->name, names);
        case SymExpr::Kind::Add: {
            std::string s;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) s += "+";
                s += order_render(e->kids[i], names);
            }
            return s;
        }
        case SymExpr::Kind::Mul: {
            // juxtaposed factors; repeated variables collapse to powers
            std::vector<std::pair<std::string, long long>> vars;
            std::vector<std::string> rest;
            Rat coef(1);
            for (const auto& k : e->kids) {
                if (k->kind == SymExpr::Kind::Const) {
                    coef = coef * k->c;
                } else if (k->kind == SymExpr::Kind::Var) {
                    std::string n = pretty_var(k->name, names);
                    if (!vars.empty() && vars.back().first == n)
                        ++vars.back().second;
                    else
                        vars.push_back({n, 1});
                } else {
                    rest.push_back(order_factor(k, names, true));
                }
            }
            std::string s;
            if (coef != Rat(1)) s += coef.str();
            for (const auto& [n, m] : vars) {
                s += n;
                if (m > 1) s += superscript(m);
            }
            for (const auto& r : rest) s += r;
            return s.empty() ? "1" : s;
        }
        case SymExpr::Kind::Min:
        case SymExpr::Kind::Max: {
            std::string s = e->kind == SymExpr::Kind::Min ? "min(" : "max(";
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) s += ",";
                s += order_render(e->kids[i], names);
            }
            return s + ")";
        }
        case SymExpr::Kind::Pow:
            return e->c.str() + "^" + order_factor(e->kids[0], names, true);
        case SymExpr::Kind::LinRec: {
            if (e->coeffs.size() == 2 && e->coeffs[0] == Rat(1) &&
                e->coeffs[1] == Rat(1))
                return "φ^" + order_factor(e->kids[0], names, true);
            std::string s = "rec[";
            for (size_t i = 0; i < e->coeffs.size(); ++i) {
                if (i) s += ",";
                s += e->coeffs[i].str();
            }
            return s + "](" + order_render(e->kids[0], names) + ")";
        }
        case SymExpr::Kind::Call:
            return e->name + "." + e->slot;
    }
    return "?";
}

std::string order_factor(const SEP& e,
                         const std::map<std::string, std::string>& names,
                         bool paren_compound) {
    std::string s = order_render(e, names);
    bool atomic = e->kind == SymExpr::Kind::Var ||
                  e->kind == SymExpr::Kind::Const ||
                  e->kind == SymExpr::Kind::Min ||
                  e->kind == SymExpr::Kind::Max;
    if (paren_compound && !atomic) return "(" + s + ")";
    return s;
}

std::string guard_str(const std::vector<DomCon>& guard,
                      const std::map<std::string, std::string>& names) {
    std::string s;
    for (size_t i = 0; i < guard.size(); ++i) {
        if (i) s += ",";
        s += pretty_var(guard[i].var, names);
        switch (guard[i].rel) {
            case DomCon::Rel::Eq: s += "="; break;
            case DomCon::Rel::Gt: s += ">"; break;
            case DomCon::Rel::Ge: s += "≥"; break;
        }
        s += guard[i].k.str();
    }
    return s;
}

std::string expr_pretty(const SEP& e,
                        const std::map<std::string, std::string>& names) {
    std::map<std::string, SEP> env;
    for (const auto& [from, to] : names) env[from] = se_var(to);
    return se_str(se_canon(se_subst(e, env)));
}

// Guard conjuncts already implied by the variables' standing lower bounds
// carry no information and are dropped from the rendering.
std::vector<DomCon> visible_guard(const std::vector<DomCon>& guard,
                                  const std::map<std::string, Rat>& lows) {
    std::vector<DomCon> out;
    for (const auto& dc : guard) {
        auto it = lows.find(dc.var);
        if (it != lows.end()) {
            if (dc.rel == DomCon::Rel::Ge && !(it->second < dc.k)) continue;
            if (dc.rel == DomCon::Rel::Gt && dc.k < it->second) continue;
        }
        out.push_back(dc);
    }
    return out;
}

std::string form_pretty(const ClosedForm& f,
                        const std::map<std::string, std::string>& names,
                        const std::map<std::string, Rat>& lows) {
    if (f.cases.empty()) return "(none)";
    std::vector<std::vector<DomCon>> guards;
    for (const auto& c : f.cases) guards.push_back(visible_guard(c.guard, lows));
    if (f.cases.size() == 1 && guards[0].empty())
        return expr_pretty(f.cases[0].expr, names);
    std::string s = "{";
    for (size_t i = 0; i < f.cases.size(); ++i) {
        if (i) s += "; ";
        if (!guards[i].empty()) s += guard_str(guards[i], names) + ": ";
        s += expr_pretty(f.cases[i].expr, names);
    }
    return s + "}";
}

BoundPair bound_pair(const AnalysisEntry& v, const std::string& lo_slot,
                     const std::string& hi_slot,
                     const std::map<std::string, std::string>& names,
                     const std::map<std::string, std::string>& families) {
    BoundPair bp;
    auto lo = v.forms.find(lo_slot);
    if (lo != v.forms.end()) {
        bp.lb = form_pretty(lo->second, names, v.lows);
        bp.lb_order = order_str(order_of_form(lo->second, v.lows), names, families);
        bp.lb_exact = lo->second.exact;
    }
    auto hi = v.forms.find(hi_slot);
    if (hi != v.forms.end()) {
        bp.ub = form_pretty(hi->second, names, v.lows);
        bp.ub_order = order_str(order_of_form(hi->second, v.lows), names, families);
        bp.ub_exact = hi->second.exact;
    }
    return bp;
}

std::string schema_pretty(const SchemaPtr& s,
                          const std::map<std::string, std::string>& names) {
    if (!s) return "?";
    switch (s->k) {
        case Schema::K::Plain: return s->symbol;
        case Schema::K::Num: {
            std::string lo = s->lo ? expr_pretty(*s->lo, names) : "?";
            std::string hi = s->hi ? expr_pretty(*s->hi, names) : "?";
            return s->symbol + "^(" + lo + "," + hi + ")";
        }
        case Schema::K::Rec: {
            std::string lo = s->lo ? expr_pretty(*s->lo, names) : "?";
            std::string hi = s->hi ? expr_pretty(*s->hi, names) : "?";
            std::string out = s->symbol + "^(" + lo + "," + hi + ")";
            if (!s->children.empty()) {
                out += "(";
                for (size_t i = 0; i < s->children.size(); ++i) {
                    if (i) out += ",";
                    out += schema_pretty(s->children[i].sub, names);
                }
                out += ")";
            }
            return out;
        }
    }
    return "?";
}

// The output shape with each Rec/Num slot's solved forms substituted in.
std::string output_pretty(const AnalysisEntry& v, size_t j, const TypeGrammar& g,
                          const std::map<std::string, std::string>& names) {
    if (j >= v.out_symbols.size()) return "?";
    SchemaPtr shape = schema_nob(v.out_symbols[j], g);
    std::vector<SlotInfo> slots;
    schema_slots(shape, slots);
    std::vector<std::optional<SEP>> exprs;
    for (size_t k = 0; k < slots.size(); ++k) {
        for (int side = 0; side < 2; ++side) {
            bool lower = side == 0;
            auto it = v.forms.find(slot_out(j, k, lower));
            if (it == v.forms.end() || it->second.cases.empty()) {
                exprs.push_back(std::nullopt);
            } else if (it->second.cases.size() == 1 &&
                       visible_guard(it->second.cases[0].guard, v.lows).empty()) {
                exprs.push_back(it->second.cases[0].expr);
            } else {
                // piecewise: pretty-render as an opaque variable
                exprs.push_back(se_var(form_pretty(it->second, names, v.lows)));
            }
        }
    }
    return schema_pretty(schema_from_exprs(shape, exprs), names);
}

}  // namespace

std::string order_str(const SEP& order,
                      const std::map<std::string, std::string>& names) {
    if (!order) return "(none)";
    return order_render(se_canon(order), names);
}

namespace {

void collect_vars(const SEP& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == SymExpr::Kind::Var) out.insert(e->name);
    for (const auto& k : e->kids) collect_vars(k, out);
}

}  // namespace

std::string order_str(const SEP& order,
                      const std::map<std::string, std::string>& names,
                      const std::map<std::string, std::string>& families) {
    if (!order) return "(none)";
    SEP c = se_canon(order);
    // A family letter whose sole representative occurs in the order sheds
    // its subscript: the bare letter is unambiguous there.
    std::set<std::string> occ;
    collect_vars(c, occ);
    std::map<std::string, std::vector<std::string>> by_fam;
    for (const auto& var : occ) {
        auto it = families.find(var);
        if (it != families.end()) by_fam[it->second].push_back(var);
    }
    std::map<std::string, std::string> local = names;
    for (const auto& [letter, members] : by_fam)
        if (members.size() == 1) local[members[0]] = letter;
    return order_render(c, local);
}

Report build_report(const AnalysisResult& r) {
    Report rep;
    rep.diagnostics = r.diags;
    for (const auto& vp : r.versions) {
        const AnalysisEntry& v = *vp;
        VersionReport vr;
        vr.version = v.version;
        auto names = pretty_names(v);
        auto families = pretty_families(v);

        std::string pat = v.pred_key.substr(0, v.pred_key.find('/')) + "(";
        size_t in_i = 0, out_i = 0;
        size_t total = v.input_args.size() + v.output_args.size();
        for (size_t pos = 0; pos < total; ++pos) {
            if (pos) pat += ", ";
            if (std::find(v.input_args.begin(), v.input_args.end(), pos) !=
                v.input_args.end()) {
                pat += schema_pretty(v.call_schemas[in_i], names);
                ++in_i;
            } else {
                pat += "-" + (out_i < v.out_symbols.size() ? v.out_symbols[out_i]
                                                           : std::string("?"));
                ++out_i;
            }
        }
        vr.pattern = pat + ")";

        AuxInfo ai = r.aux.get(v.pred_key);
        vr.nf = ai.nf == NF::NotFails ? "not_fails" : "fails";
        vr.det = ai.det == Det::IsDet ? "is_det" : "non_det";

        vr.solutions =
            bound_pair(v, slot_sol(true), slot_sol(false), names, families);
        for (const auto& rd : r.resources)
            vr.resources.push_back(
                {rd.name, bound_pair(v, slot_res(rd.name, true),
                                     slot_res(rd.name, false), names, families)});
        for (size_t j = 0; j < v.output_args.size(); ++j)
            vr.outputs.push_back(output_pretty(v, j, r.grammar, names));
        rep.versions.push_back(std::move(vr));
    }
    return rep;
}

namespace {

void render_pair(std::ostringstream& os, const std::string& label,
                 const BoundPair& bp, bool structured) {
    if (structured) {
        os << "bounds: " << label << "\n";
        os << "lb: " << bp.lb << "\n";
        os << "lb.order: " << bp.lb_order << "\n";
        os << "lb.exact: " << (bp.lb_exact ? "yes" : "no") << "\n";
        os << "ub: " << bp.ub << "\n";
        os << "ub.order: " << bp.ub_order << "\n";
        os << "ub.exact: " << (bp.ub_exact ? "yes" : "no") << "\n";
    } else {
        os << "  " << label << ":\n";
        os << "    lb: " << bp.lb << (bp.lb_exact ? "  [exact]" : "  [approx]")
           << "  order " << bp.lb_order << "\n";
        os << "    ub: " << bp.ub << (bp.ub_exact ? "  [exact]" : "  [approx]")
           << "  order " << bp.ub_order << "\n";
    }
}

}  // namespace

std::string report_text(const Report& rep) {
    std::ostringstream os;
    for (const auto& v : rep.versions) {
        os << v.version << "  " << v.pattern << "\n";
        os << "  non-failure: " << v.nf << "   determinism: " << v.det << "\n";
        render_pair(os, "solutions", v.solutions, false);
        for (const auto& [name, bp] : v.resources) render_pair(os, name, bp, false);
        for (size_t j = 0; j < v.outputs.size(); ++j)
            os << "  out " << j << ": " << v.outputs[j] << "\n";
        os << "\n";
    }
    for (const auto& d : rep.diagnostics) os << "diagnostic: " << d << "\n";
    return os.str();
}

std::string report_structured(const Report& rep) {
    std::ostringstream os;
    os << "sra-report 1\n";
    for (const auto& d : rep.diagnostics) os << "diagnostic: " << d << "\n";
    for (const auto& v : rep.versions) {
        os << "version: " << v.version << "\n";
        os << "pattern: " << v.pattern << "\n";
        os << "nf: " << v.nf << "\n";
        os << "det: " << v.det << "\n";
        render_pair(os, "solutions", v.solutions, true);
        for (const auto& [name, bp] : v.resources)
            render_pair(os, "resource " + name, bp, true);
        for (const auto& o : v.outputs) os << "out: " << o << "\n";
        os << "end: " << v.version << "\n";
    }
    return os.str();
}

std::optional<Report> parse_structured(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "sra-report 1") return std::nullopt;
    Report rep;
    VersionReport* cur = nullptr;
    BoundPair* bp = nullptr;
    auto split = [](const std::string& l) -> std::pair<std::string, std::string> {
        size_t p = l.find(": ");
        if (p == std::string::npos) return {l, ""};
        return {l.substr(0, p), l.substr(p + 2)};
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto [key, val] = split(line);
        if (key == "diagnostic") {
            rep.diagnostics.push_back(val);
        } else if (key == "version") {
            rep.versions.emplace_back();
            cur = &rep.versions.back();
            cur->version = val;
            bp = nullptr;
        } else if (!cur) {
            return std::nullopt;
        } else if (key == "pattern") {
            cur->pattern = val;
        } else if (key == "nf") {
            cur->nf = val;
        } else if (key == "det") {
            cur->det = val;
        } else if (key == "bounds") {
            if (val == "solutions") {
                bp = &cur->solutions;
            } else if (val.rfind("resource ", 0) == 0) {
                cur->resources.push_back({val.substr(9), BoundPair{}});
                bp = &cur->resources.back().second;
            } else {
                return std::nullopt;
            }
        } else if (key == "out") {
            cur->outputs.push_back(val);
        } else if (key == "end") {
            if (val != cur->version) return std::nullopt;
            cur = nullptr;
            bp = nullptr;
        } else if (bp) {
            if (key == "lb") bp->lb = val;
            else if (key == "lb.order") bp->lb_order = val;
            else if (key == "lb.exact") bp->lb_exact = val == "yes";
            else if (key == "ub") bp->ub = val;
            else if (key == "ub.order") bp->ub_order = val;
            else if (key == "ub.exact") bp->ub_exact = val == "yes";
            else return std::nullopt;
        } else {
            return std::nullopt;
        }
    }
    return rep;
}

}  // namespace sra
