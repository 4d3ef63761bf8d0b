#include "sra/regtypes.hpp"

#include <algorithm>
#include <functional>

namespace sra {

LeafKind leaf_kind(const std::string& name, const TypeGrammar& g) {
    if (TypeGrammar::is_base(name)) return LeafKind::Base;
    if (g.declared(name)) return LeafKind::Symbol;
    return LeafKind::Constructor;
}

std::string type_symbol_for(const TermPtr& type_term, TypeGrammar& g,
                            std::vector<std::string>& errors) {
    if (type_term->kind == Term::Kind::Comp && type_term->name == "list" &&
        type_term->args.size() == 1) {
        std::string inner = type_symbol_for(type_term->args[0], g, errors);
        std::string name = "list(" + inner + ")";
        if (!g.rules.count(name))
            g.rules[name] = {mk_nil(), mk_cons(mk_atom(inner), mk_atom(name))};
        return name;
    }
    if (is_atom(type_term)) {
        if (!g.defined(type_term->name))
            errors.push_back("unknown type '" + type_term->name + "'");
        return type_term->name;
    }
    errors.push_back("invalid type term '" + term_str(type_term) + "'");
    return "num";
}

TypeGrammar build_grammar(const Program& p, std::vector<std::string>& errors) {
    TypeGrammar g;
    for (const auto& td : p.types) g.rules[td.name] = td.alts;
    for (const auto& e : p.entries)
        for (const auto& a : e.args) type_symbol_for(a.type, g, errors);
    return g;
}

namespace {

void referenced_symbols(const TermPtr& tt, const TypeGrammar& g,
                        std::set<std::string>& out) {
    if (tt->kind == Term::Kind::Int) return;
    if (is_atom(tt)) {
        if (leaf_kind(tt->name, g) == LeafKind::Symbol) out.insert(tt->name);
        return;
    }
    for (const auto& a : tt->args) referenced_symbols(a, g, out);
}

bool contains_var(const TermPtr& t) {
    if (t->kind == Term::Kind::Var) return true;
    for (const auto& a : t->args)
        if (contains_var(a)) return true;
    return false;
}

// First-shape tags used for the determinism check: "i:<k>" an integer
// constant, "I" any integer, "c:<name>" a constant constructor,
// "f:<name>/<n>" a compound constructor.
void firsts(const TermPtr& alt, const TypeGrammar& g, std::set<std::string>& seen,
            std::set<std::string>& out) {
    if (alt->kind == Term::Kind::Int) {
        out.insert("i:" + std::to_string(alt->value));
        return;
    }
    if (is_atom(alt)) {
        switch (leaf_kind(alt->name, g)) {
            case LeafKind::Base:
                out.insert("I");
                return;
            case LeafKind::Constructor:
                out.insert("c:" + alt->name);
                return;
            case LeafKind::Symbol: {
                if (!seen.insert(alt->name).second) return;  // cycle guard
                auto it = g.rules.find(alt->name);
                if (it != g.rules.end())
                    for (const auto& a : it->second) firsts(a, g, seen, out);
                return;
            }
        }
    }
    out.insert("f:" + alt->name + "/" + std::to_string(alt->args.size()));
}

bool first_sets_overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    bool a_any_int = a.count("I"), b_any_int = b.count("I");
    for (const auto& x : a) {
        if (b.count(x)) return true;
        if (b_any_int && x.rfind("i:", 0) == 0) return true;
    }
    if (a_any_int)
        for (const auto& x : b)
            if (x.rfind("i:", 0) == 0) return true;
    return false;
}

}  // namespace

bool alt_is_recursive(const TermPtr& alt, const std::string& symbol) {
    if (is_atom(alt)) return alt->name == symbol;
    for (const auto& a : alt->args)
        if (alt_is_recursive(a, symbol)) return true;
    return false;
}

bool is_recursive_symbol(const std::string& symbol, const TypeGrammar& g) {
    auto it = g.rules.find(symbol);
    if (it == g.rules.end()) return false;
    for (const auto& alt : it->second)
        if (alt_is_recursive(alt, symbol)) return true;
    return false;
}

bool well_formed(const TypeGrammar& g, std::vector<std::string>& errors) {
    size_t before = errors.size();

    for (const auto& [name, alts] : g.rules) {
        if (alts.empty()) errors.push_back("type '" + name + "' has no alternatives");
        for (const auto& alt : alts) {
            if (contains_var(alt))
                errors.push_back("type '" + name + "' has a variable in an alternative");
            if (is_atom(alt) && alt->name == name)
                errors.push_back("type '" + name + "' aliases itself");
        }
    }

    // Determinism: pairwise-disjoint first shapes.
    for (const auto& [name, alts] : g.rules) {
        std::vector<std::set<std::string>> fs;
        for (const auto& alt : alts) {
            std::set<std::string> seen{name}, out;
            firsts(alt, g, seen, out);
            fs.push_back(std::move(out));
        }
        for (size_t i = 0; i < fs.size(); ++i)
            for (size_t j = i + 1; j < fs.size(); ++j)
                if (first_sets_overlap(fs[i], fs[j]))
                    errors.push_back("type '" + name +
                                     "' has overlapping alternatives (not deterministic)");
    }

    // Mutual recursion between distinct symbols.
    std::map<std::string, std::set<std::string>> refs;
    for (const auto& [name, alts] : g.rules)
        for (const auto& alt : alts) referenced_symbols(alt, g, refs[name]);
    std::function<bool(const std::string&, const std::string&, std::set<std::string>&)>
        reaches = [&](const std::string& from, const std::string& to,
                      std::set<std::string>& vis) {
            if (!vis.insert(from).second) return false;
            for (const auto& n : refs[from]) {
                if (n == to) return true;
                if (reaches(n, to, vis)) return true;
            }
            return false;
        };
    for (const auto& [a, out] : refs)
        for (const auto& b : out) {
            if (b == a) continue;
            std::set<std::string> vis;
            if (reaches(b, a, vis))
                errors.push_back("types '" + a + "' and '" + b +
                                 "' are mutually recursive (unsupported)");
        }

    // Productivity: every symbol generates at least one finite term.
    std::set<std::string> productive;
    std::function<bool(const TermPtr&)> alt_productive = [&](const TermPtr& alt) {
        if (alt->kind == Term::Kind::Int) return true;
        if (is_atom(alt)) {
            switch (leaf_kind(alt->name, g)) {
                case LeafKind::Base:
                case LeafKind::Constructor:
                    return true;
                case LeafKind::Symbol:
                    return productive.count(alt->name) > 0;
            }
        }
        for (const auto& a : alt->args)
            if (!alt_productive(a)) return false;
        return true;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [name, alts] : g.rules) {
            if (productive.count(name)) continue;
            for (const auto& alt : alts)
                if (alt_productive(alt)) {
                    productive.insert(name);
                    changed = true;
                    break;
                }
        }
    }
    for (const auto& [name, alts] : g.rules)
        if (!productive.count(name))
            errors.push_back("type '" + name + "' generates no finite term");

    return errors.size() == before;
}

bool member_of_type_term(const TermPtr& t, const TermPtr& tt, const TypeGrammar& g) {
    if (tt->kind == Term::Kind::Int)
        return t->kind == Term::Kind::Int && t->value == tt->value;
    if (tt->kind == Term::Kind::Var) return false;
    if (is_atom(tt)) {
        switch (leaf_kind(tt->name, g)) {
            case LeafKind::Base:
                if (t->kind != Term::Kind::Int) return false;
                return tt->name == "num" || t->value >= 0;
            case LeafKind::Symbol:
                return membership(t, tt->name, g);
            case LeafKind::Constructor:
                return is_atom(t) && t->name == tt->name;
        }
    }
    if (t->kind != Term::Kind::Comp || t->name != tt->name ||
        t->args.size() != tt->args.size())
        return false;
    for (size_t i = 0; i < t->args.size(); ++i)
        if (!member_of_type_term(t->args[i], tt->args[i], g)) return false;
    return true;
}

bool membership(const TermPtr& t, const std::string& symbol, const TypeGrammar& g) {
    if (contains_var(t)) return false;
    if (TypeGrammar::is_base(symbol))
        return t->kind == Term::Kind::Int && (symbol == "num" || t->value >= 0);
    auto it = g.rules.find(symbol);
    if (it == g.rules.end()) return false;
    for (const auto& alt : it->second)
        if (member_of_type_term(t, alt, g)) return true;
    return false;
}

const TermPtr* matching_alt(const TermPtr& t, const std::string& symbol,
                            const TypeGrammar& g) {
    auto it = g.rules.find(symbol);
    if (it == g.rules.end()) return nullptr;
    for (const auto& alt : it->second) {
        if (alt->kind == Term::Kind::Int) {
            if (t->kind == Term::Kind::Int && t->value == alt->value) return &alt;
            continue;
        }
        if (is_atom(alt)) {
            switch (leaf_kind(alt->name, g)) {
                case LeafKind::Base:
                    if (t->kind == Term::Kind::Int) return &alt;
                    break;
                case LeafKind::Constructor:
                    if (is_atom(t) && t->name == alt->name) return &alt;
                    break;
                case LeafKind::Symbol:
                    if (member_of_type_term(t, alt, g)) return &alt;
                    break;
            }
            continue;
        }
        if (t->kind == Term::Kind::Comp && t->name == alt->name &&
            t->args.size() == alt->args.size())
            return &alt;
    }
    return nullptr;
}

}  // namespace sra
