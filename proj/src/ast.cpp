#include "sra/ast.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace sra {

TermPtr mk_var(const std::string& name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Var;
    t->name = name;
    return t;
}

TermPtr mk_int(long long v) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Int;
    t->value = v;
    return t;
}

TermPtr mk_comp(const std::string& functor, std::vector<TermPtr> args) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Comp;
    t->name = functor;
    t->args = std::move(args);
    return t;
}

TermPtr mk_atom(const std::string& name) { return mk_comp(name, {}); }

TermPtr mk_nil() { return mk_atom("[]"); }

TermPtr mk_cons(TermPtr head, TermPtr tail) {
    return mk_comp(".", {std::move(head), std::move(tail)});
}

TermPtr mk_list(const std::vector<TermPtr>& items) {
    TermPtr t = mk_nil();
    for (auto it = items.rbegin(); it != items.rend(); ++it) t = mk_cons(*it, t);
    return t;
}

bool is_nil(const TermPtr& t) {
    return t->kind == Term::Kind::Comp && t->name == "[]" && t->args.empty();
}

bool is_cons(const TermPtr& t) {
    return t->kind == Term::Kind::Comp && t->name == "." && t->args.size() == 2;
}

bool is_atom(const TermPtr& t) {
    return t->kind == Term::Kind::Comp && t->args.empty();
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    return term_compare(a, b) == 0;
}

int term_compare(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
        case Term::Kind::Var:
            return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
        case Term::Kind::Int:
            return a->value < b->value ? -1 : (a->value == b->value ? 0 : 1);
        case Term::Kind::Comp: {
            if (a->args.size() != b->args.size())
                return a->args.size() < b->args.size() ? -1 : 1;
            if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (int c = term_compare(a->args[i], b->args[i])) return c;
            return 0;
        }
    }
    return 0;
}

static bool needs_quotes(const std::string& name) {
    if (name.empty()) return true;
    if (name == "[]" || name == ".") return false;
    if (!(std::islower(static_cast<unsigned char>(name[0])))) return true;
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return true;
    return false;
}

// Operator precedence mirroring the parser: comparisons/=/is at 700 (xfx),
// +/- at 500 (yfx), * at 400 (yfx). Printing respects it so every printed
// program re-parses to the same tree.
static int op_prec(const TermPtr& t) {
    if (t->kind != Term::Kind::Comp || t->args.size() != 2) return 0;
    const std::string& n = t->name;
    if (n == "=" || n == "is" || n == "<" || n == ">" || n == "=<" || n == ">=" ||
        n == "=:=" || n == "=\\=")
        return 700;
    if (n == "+" || n == "-") return 500;
    if (n == "*") return 400;
    return 0;
}

static void print_term(std::ostream& os, const TermPtr& t, int max_prec) {
    switch (t->kind) {
        case Term::Kind::Var:
            os << t->name;
            return;
        case Term::Kind::Int:
            os << t->value;
            return;
        case Term::Kind::Comp:
            break;
    }
    if (is_nil(t)) {
        os << "[]";
        return;
    }
    if (is_cons(t)) {
        os << '[';
        print_term(os, t->args[0], 700);
        TermPtr rest = t->args[1];
        while (is_cons(rest)) {
            os << ',';
            print_term(os, rest->args[0], 700);
            rest = rest->args[1];
        }
        if (!is_nil(rest)) {
            os << '|';
            print_term(os, rest, 700);
        }
        os << ']';
        return;
    }
    if (int prec = op_prec(t)) {
        bool wrap = prec > max_prec;
        if (wrap) os << '(';
        // xfx at 700: both sides below; yfx: left side may match, right must
        // be strictly below.
        print_term(os, t->args[0], prec == 700 ? prec - 1 : prec);
        if (prec == 700)
            os << ' ' << t->name << ' ';
        else
            os << t->name;
        print_term(os, t->args[1], prec - 1);
        if (wrap) os << ')';
        return;
    }
    if (needs_quotes(t->name))
        os << '\'' << t->name << '\'';
    else
        os << t->name;
    if (!t->args.empty()) {
        os << '(';
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (i) os << ',';
            print_term(os, t->args[i], 700);
        }
        os << ')';
    }
}

std::string term_str(const TermPtr& t) {
    std::ostringstream os;
    print_term(os, t, 700);
    return os.str();
}

void collect_vars(const TermPtr& t, std::vector<std::string>& out) {
    if (t->kind == Term::Kind::Var) {
        if (std::find(out.begin(), out.end(), t->name) == out.end())
            out.push_back(t->name);
        return;
    }
    for (const auto& a : t->args) collect_vars(a, out);
}

std::string pred_key(const std::string& name, size_t arity) {
    return name + "/" + std::to_string(arity);
}

std::string clause_str(const Clause& c) {
    std::ostringstream os;
    print_term(os, c.head, 0);
    if (!c.body.empty()) {
        os << " :- ";
        for (size_t i = 0; i < c.body.size(); ++i) {
            if (i) os << ", ";
            print_term(os, c.body[i].atom, 700);
        }
    }
    os << '.';
    return os.str();
}

std::string program_str(const Program& p) {
    std::ostringstream os;
    for (const auto& t : p.types) {
        os << ":- regtype " << t.name << " := ";
        for (size_t i = 0; i < t.alts.size(); ++i) {
            if (i) os << " | ";
            print_term(os, t.alts[i], 0);
        }
        os << ".\n";
    }
    for (const auto& e : p.entries) {
        os << ":- entry " << e.pred << '(';
        for (size_t i = 0; i < e.args.size(); ++i) {
            if (i) os << ',';
            os << (e.args[i].mode == Mode::In ? '+' : '-');
            print_term(os, e.args[i].type, 0);
        }
        os << ").\n";
    }
    for (const auto& r : p.resources) {
        os << ":- resource " << r.name << "(headcost=" << r.headcost
           << ", litcost=" << r.litcost;
        if (r.opcost_add) os << ", opcost(+)=" << r.opcost_add;
        if (r.opcost_sub) os << ", opcost(-)=" << r.opcost_sub;
        if (r.opcost_mul) os << ", opcost(*)=" << r.opcost_mul;
        os << ", agg_ub=" << (r.agg_ub_sum ? "sum" : "max");
        os << ", agg_lb=" << (r.agg_lb_min ? "min" : "sum");
        os << ", default=(" << r.default_lb << ',' << r.default_ub << ")).\n";
    }
    for (const auto& t : p.trusts) {
        os << ":- trust " << t.pred << '/' << t.arity << " +";
        if (t.not_fails && t.is_det)
            os << " not_fails + is_det";
        else if (t.not_fails)
            os << " not_fails";
        else
            os << " is_det";
        os << ".\n";
    }
    for (const auto& c : p.clauses) os << clause_str(c) << '\n';
    return os.str();
}

}  // namespace sra
