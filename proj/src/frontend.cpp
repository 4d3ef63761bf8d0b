#include "sra/frontend.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace sra {

ParseError::ParseError(int line_, int col_, const std::string& msg)
    : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
      line(line_),
      col(col_) {}

bool is_builtin(const std::string& name, size_t arity) {
    if (arity != 2) return false;
    return name == "=" || name == "is" || is_comparison(name);
}

bool is_comparison(const std::string& name) {
    return name == "<" || name == ">" || name == "=<" || name == ">=" ||
           name == "=:=" || name == "=\\=";
}

namespace {

enum class Tok { Atom, Var, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long long value = 0;
    int line = 1, col = 1;
};

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(line, col, msg); }

    int peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? static_cast<unsigned char>(src[pos + ahead]) : -1;
    }

    void advance() {
        if (pos >= src.size()) return;
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_layout() {
        for (;;) {
            int c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '%') {
                while (peek() != -1 && peek() != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                int sl = line, sc = col;
                advance();
                advance();
                while (!(peek() == '*' && peek(1) == '/')) {
                    if (peek() == -1) throw ParseError(sl, sc, "unterminated block comment");
                    advance();
                }
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    bool layout_or_end_follows() const {
        int c = peek();
        return c == -1 || c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '%';
    }

    Token next() {
        skip_layout();
        Token t;
        t.line = line;
        t.col = col;
        int c = peek();
        if (c == -1) {
            t.kind = Tok::End;
            return t;
        }
        if (std::isdigit(c)) {
            long long v = 0;
            while (std::isdigit(peek())) {
                v = v * 10 + (peek() - '0');
                advance();
            }
            t.kind = Tok::Int;
            t.value = v;
            return t;
        }
        if (std::isalpha(c) || c == '_') {
            std::string s;
            while (std::isalnum(peek()) || peek() == '_') {
                s.push_back(static_cast<char>(peek()));
                advance();
            }
            t.text = s;
            t.kind = (std::isupper(c) || c == '_') ? Tok::Var : Tok::Atom;
            return t;
        }
        auto punct = [&](const char* s) {
            t.kind = Tok::Punct;
            t.text = s;
            for (const char* q = s; *q; ++q) advance();
            return t;
        };
        switch (c) {
            case '(': return punct("(");
            case ')': return punct(")");
            case '[': return punct("[");
            case ']': return punct("]");
            case ',': return punct(",");
            case '|': return punct("|");
            case '+': return punct("+");
            case '*': return punct("*");
            case ';': return punct(";");
            case '!': return punct("!");
            case '/': return punct("/");
            case '\'': {
                advance();
                std::string s;
                while (peek() != '\'') {
                    if (peek() == -1) fail("unterminated quoted atom");
                    s.push_back(static_cast<char>(peek()));
                    advance();
                }
                advance();
                t.kind = Tok::Atom;
                t.text = s;
                return t;
            }
            case '-':
                if (peek(1) == '>') return punct("->");
                return punct("-");
            case '\\':
                if (peek(1) == '+') return punct("\\+");
                fail("unexpected character '\\'");
            case ':':
                if (peek(1) == '-') return punct(":-");
                if (peek(1) == '=') return punct(":=");
                fail("unexpected character ':'");
            case '=':
                if (peek(1) == '<') return punct("=<");
                if (peek(1) == ':' && peek(2) == '=') return punct("=:=");
                if (peek(1) == '\\' && peek(2) == '=') return punct("=\\=");
                return punct("=");
            case '<': return punct("<");
            case '>':
                if (peek(1) == '=') return punct(">=");
                return punct(">");
            case '.':
                advance();
                if (!layout_or_end_follows()) fail("'.' is only valid as clause terminator");
                t.kind = Tok::Punct;
                t.text = ".";
                return t;
            default:
                fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
        }
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t idx = 0;
    Program prog;
    int anon_count = 0;                 // per-clause anonymous variable counter
    std::set<std::string> clause_vars;  // named vars seen in the current clause

    explicit Parser(const std::string& text) {
        Lexer lx(text);
        for (;;) {
            Token t = lx.next();
            toks.push_back(t);
            if (t.kind == Tok::End) break;
        }
    }

    const Token& peek(size_t ahead = 0) const {
        size_t j = idx + ahead;
        return j < toks.size() ? toks[j] : toks.back();
    }

    Token advance() { return toks[idx < toks.size() - 1 ? idx++ : idx]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) {
        throw ParseError(t.line, t.col, msg);
    }

    bool at_punct(const char* p) const {
        return peek().kind == Tok::Punct && peek().text == p;
    }

    Token expect_punct(const char* p, const std::string& what) {
        if (!at_punct(p)) fail(peek(), "expected '" + std::string(p) + "' " + what);
        return advance();
    }

    Token expect_atom(const std::string& what) {
        if (peek().kind != Tok::Atom) fail(peek(), "expected " + what);
        return advance();
    }

    long long expect_int_signed(const std::string& what) {
        bool neg = false;
        if (at_punct("-")) {
            neg = true;
            advance();
        }
        if (peek().kind != Tok::Int) fail(peek(), "expected integer " + what);
        long long v = advance().value;
        return neg ? -v : v;
    }

    // --- terms -----------------------------------------------------------

    TermPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int:
                advance();
                return mk_int(t.value);
            case Tok::Var: {
                advance();
                if (t.text == "_") {
                    return mk_var("_anon@" + std::to_string(anon_count++));
                }
                clause_vars.insert(t.text);
                return mk_var(t.text);
            }
            case Tok::Atom: {
                Token name = advance();
                if (at_punct("(")) {
                    advance();
                    std::vector<TermPtr> args;
                    args.push_back(parse_term700());
                    while (at_punct(",")) {
                        advance();
                        args.push_back(parse_term700());
                    }
                    expect_punct(")", "to close argument list");
                    return mk_comp(name.text, std::move(args));
                }
                return mk_atom(name.text);
            }
            case Tok::Punct:
                if (t.text == "[") return parse_list();
                if (t.text == "(") {
                    advance();
                    TermPtr inner = parse_term700();
                    expect_punct(")", "to close parenthesized term");
                    return inner;
                }
                if (t.text == "-" && peek(1).kind == Tok::Int) {
                    advance();
                    long long v = advance().value;
                    return mk_int(-v);
                }
                if (t.text == ";" || t.text == "->" || t.text == "!" || t.text == "\\+")
                    fail(t, "unsupported construct '" + t.text + "'");
                fail(t, "expected a term, found '" + t.text + "'");
            case Tok::End:
                fail(t, "unexpected end of input");
        }
        fail(t, "expected a term");
    }

    TermPtr parse_list() {
        expect_punct("[", "to open list");
        if (at_punct("]")) {
            advance();
            return mk_nil();
        }
        std::vector<TermPtr> items;
        items.push_back(parse_term700());
        while (at_punct(",")) {
            advance();
            items.push_back(parse_term700());
        }
        TermPtr tail = mk_nil();
        if (at_punct("|")) {
            advance();
            tail = parse_term700();
        }
        expect_punct("]", "to close list");
        for (auto it = items.rbegin(); it != items.rend(); ++it) tail = mk_cons(*it, tail);
        return tail;
    }

    TermPtr parse_term400() {
        TermPtr l = parse_primary();
        while (at_punct("*")) {
            advance();
            l = mk_comp("*", {l, parse_primary()});
        }
        return l;
    }

    TermPtr parse_term500() {
        TermPtr l = parse_term400();
        for (;;) {
            if (at_punct("+")) {
                advance();
                l = mk_comp("+", {l, parse_term400()});
            } else if (at_punct("-")) {
                advance();
                l = mk_comp("-", {l, parse_term400()});
            } else {
                break;
            }
        }
        return l;
    }

    TermPtr parse_term700() {
        TermPtr l = parse_term500();
        const Token& t = peek();
        std::string op;
        if (t.kind == Tok::Punct &&
            (t.text == "=" || is_comparison(t.text)))
            op = t.text;
        else if (t.kind == Tok::Atom && t.text == "is")
            op = "is";
        else if (t.kind == Tok::Atom && (t.text == "mod" || t.text == "div" || t.text == "rem"))
            fail(t, "unsupported arithmetic operator '" + t.text + "'");
        else if (t.kind == Tok::Punct && t.text == "/")
            fail(t, "unsupported operator '/'");
        if (op.empty()) return l;
        advance();
        return mk_comp(op, {l, parse_term500()});
    }

    // --- clauses ---------------------------------------------------------

    // Replaces placeholder names of anonymous variables with fresh surface
    // names so printed programs re-parse to the same AST.
    TermPtr rename_vars(const TermPtr& t, const std::map<std::string, std::string>& ren) {
        if (t->kind == Term::Kind::Var) {
            auto it = ren.find(t->name);
            return it == ren.end() ? t : mk_var(it->second);
        }
        if (t->kind != Term::Kind::Comp || t->args.empty()) return t;
        std::vector<TermPtr> args;
        args.reserve(t->args.size());
        for (const auto& a : t->args) args.push_back(rename_vars(a, ren));
        return mk_comp(t->name, std::move(args));
    }

    void finish_clause_vars(Clause& c) {
        if (anon_count == 0) return;
        std::map<std::string, std::string> ren;
        int j = 0;
        for (int k = 0; k < anon_count; ++k) {
            std::string fresh;
            do {
                fresh = "_" + std::to_string(j++);
            } while (clause_vars.count(fresh));
            ren["_anon@" + std::to_string(k)] = fresh;
        }
        c.head = rename_vars(c.head, ren);
        for (auto& lit : c.body) lit.atom = rename_vars(lit.atom, ren);
    }

    Literal parse_literal() {
        Token at = peek();
        TermPtr t = parse_term700();
        if (t->kind != Term::Kind::Comp)
            fail(at, "expected a goal, found a " +
                         std::string(t->kind == Term::Kind::Int ? "number" : "variable"));
        if (t->name == ";" || t->name == "->")
            fail(at, "unsupported construct '" + t->name + "'");
        return Literal{t, at.line, at.col};
    }

    void parse_clause() {
        anon_count = 0;
        clause_vars.clear();
        Token start = peek();
        Clause c;
        c.line = start.line;
        c.col = start.col;
        TermPtr head = parse_term700();
        if (head->kind != Term::Kind::Comp)
            fail(start, "clause head must be an atom or compound term");
        if (is_builtin(head->name, head->args.size()) || head->name == "is")
            fail(start, "cannot redefine builtin '" + head->name + "'");
        c.head = head;
        if (at_punct(":-")) {
            advance();
            c.body.push_back(parse_literal());
            while (at_punct(",")) {
                advance();
                c.body.push_back(parse_literal());
            }
        }
        expect_punct(".", "to end clause");
        finish_clause_vars(c);
        prog.clauses.push_back(std::move(c));
    }

    // --- directives ------------------------------------------------------

    void parse_regtype(const Token& kw) {
        TypeDef td;
        td.line = kw.line;
        td.col = kw.col;
        td.name = expect_atom("type name after 'regtype'").text;
        expect_punct(":=", "after type name");
        td.alts.push_back(parse_primary());
        while (at_punct("|")) {
            advance();
            td.alts.push_back(parse_primary());
        }
        expect_punct(".", "to end regtype directive");
        prog.types.push_back(std::move(td));
    }

    void parse_entry(const Token& kw) {
        EntryDecl e;
        e.line = kw.line;
        e.col = kw.col;
        e.pred = expect_atom("predicate name after 'entry'").text;
        expect_punct("(", "after predicate name");
        for (;;) {
            ModeArg ma;
            if (at_punct("+"))
                ma.mode = Mode::In;
            else if (at_punct("-"))
                ma.mode = Mode::Out;
            else
                fail(peek(), "expected '+' or '-' mode marker");
            advance();
            ma.type = parse_primary();
            e.args.push_back(std::move(ma));
            if (at_punct(",")) {
                advance();
                continue;
            }
            break;
        }
        expect_punct(")", "to close entry declaration");
        expect_punct(".", "to end entry directive");
        prog.entries.push_back(std::move(e));
    }

    void parse_resource(const Token& kw) {
        ResourceDecl r;
        r.line = kw.line;
        r.col = kw.col;
        r.name = expect_atom("resource name after 'resource'").text;
        if (at_punct("(")) {
            advance();
            for (;;) {
                Token key = expect_atom("resource parameter name");
                if (key.text == "opcost") {
                    expect_punct("(", "after 'opcost'");
                    Token op = advance();
                    if (op.kind != Tok::Punct ||
                        (op.text != "+" && op.text != "-" && op.text != "*"))
                        fail(op, "expected one of +, -, * in opcost(...)");
                    expect_punct(")", "after operator");
                    expect_punct("=", "after opcost(...)");
                    long long v = expect_int_signed("for opcost");
                    if (op.text == "+") r.opcost_add = v;
                    if (op.text == "-") r.opcost_sub = v;
                    if (op.text == "*") r.opcost_mul = v;
                } else if (key.text == "headcost") {
                    expect_punct("=", "after 'headcost'");
                    r.headcost = expect_int_signed("for headcost");
                } else if (key.text == "litcost") {
                    expect_punct("=", "after 'litcost'");
                    r.litcost = expect_int_signed("for litcost");
                } else if (key.text == "agg_ub") {
                    expect_punct("=", "after 'agg_ub'");
                    Token v = expect_atom("sum or max");
                    if (v.text == "sum")
                        r.agg_ub_sum = true;
                    else if (v.text == "max")
                        r.agg_ub_sum = false;
                    else
                        fail(v, "agg_ub must be sum or max");
                } else if (key.text == "agg_lb") {
                    expect_punct("=", "after 'agg_lb'");
                    Token v = expect_atom("min or sum");
                    if (v.text == "min")
                        r.agg_lb_min = true;
                    else if (v.text == "sum")
                        r.agg_lb_min = false;
                    else
                        fail(v, "agg_lb must be min or sum");
                } else if (key.text == "default") {
                    expect_punct("=", "after 'default'");
                    expect_punct("(", "for default bounds");
                    r.default_lb = expect_int_signed("for default lower bound");
                    expect_punct(",", "between default bounds");
                    r.default_ub = expect_int_signed("for default upper bound");
                    expect_punct(")", "to close default bounds");
                } else {
                    fail(key, "unknown resource parameter '" + key.text + "'");
                }
                if (at_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
            expect_punct(")", "to close resource declaration");
        }
        expect_punct(".", "to end resource directive");
        prog.resources.push_back(std::move(r));
    }

    void parse_trust(const Token& kw) {
        TrustDecl t;
        t.line = kw.line;
        t.col = kw.col;
        t.pred = expect_atom("predicate name after 'trust'").text;
        if (at_punct("/")) {
            advance();
            if (peek().kind != Tok::Int) fail(peek(), "expected arity after '/'");
            t.arity = static_cast<int>(advance().value);
        } else if (at_punct("(")) {
            anon_count = 0;
            clause_vars.clear();
            advance();
            int n = 0;
            for (;;) {
                parse_term700();  // argument shapes are documentation only
                ++n;
                if (at_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
            expect_punct(")", "to close trust declaration");
            t.arity = n;
        } else {
            fail(peek(), "expected '/arity' or '(args)' after predicate name");
        }
        if (!at_punct("+")) fail(peek(), "expected '+ not_fails' or '+ is_det'");
        while (at_punct("+")) {
            advance();
            Token f = expect_atom("trust property");
            if (f.text == "not_fails")
                t.not_fails = true;
            else if (f.text == "is_det")
                t.is_det = true;
            else
                fail(f, "unknown trust property '" + f.text + "'");
        }
        expect_punct(".", "to end trust directive");
        prog.trusts.push_back(std::move(t));
    }

    void parse_directive() {
        expect_punct(":-", "to start directive");
        Token kw = expect_atom("directive name");
        if (kw.text == "regtype")
            parse_regtype(kw);
        else if (kw.text == "entry")
            parse_entry(kw);
        else if (kw.text == "resource")
            parse_resource(kw);
        else if (kw.text == "trust")
            parse_trust(kw);
        else
            fail(kw, "unknown directive '" + kw.text + "'");
    }

    void run() {
        while (peek().kind != Tok::End) {
            if (at_punct(":-"))
                parse_directive();
            else
                parse_clause();
        }
    }

    // --- post-parse checks -------------------------------------------------

    bool type_name_known(const std::set<std::string>& declared, const TermPtr& ty) {
        if (ty->kind != Term::Kind::Comp) return false;
        if (ty->name == "list" && ty->args.size() == 1)
            return type_name_known(declared, ty->args[0]);
        if (!ty->args.empty()) return false;
        return ty->name == "num" || ty->name == "nat" || declared.count(ty->name) > 0;
    }

    void check() {
        std::set<std::string> defined;  // name/arity
        for (const auto& c : prog.clauses)
            defined.insert(pred_key(c.head->name, c.head->args.size()));

        std::set<std::string> type_names;
        for (const auto& t : prog.types) {
            if (t.name == "num" || t.name == "nat" || t.name == "list")
                throw ParseError(t.line, t.col, "cannot redefine builtin type '" + t.name + "'");
            if (!type_names.insert(t.name).second)
                throw ParseError(t.line, t.col, "duplicate type definition '" + t.name + "'");
        }

        std::set<std::string> entry_sigs;
        for (const auto& e : prog.entries) {
            std::string key = pred_key(e.pred, e.args.size());
            if (!defined.count(key))
                throw ParseError(e.line, e.col, "entry for undefined predicate " + key);
            std::ostringstream sig;
            sig << key;
            for (const auto& a : e.args)
                sig << '|' << (a.mode == Mode::In ? '+' : '-') << term_str(a.type);
            if (!entry_sigs.insert(sig.str()).second)
                throw ParseError(e.line, e.col, "duplicate entry declaration for " + key);
            for (const auto& a : e.args)
                if (!type_name_known(type_names, a.type))
                    throw ParseError(e.line, e.col,
                                     "unknown type '" + term_str(a.type) + "' in entry for " + key);
        }

        std::set<std::string> resource_names;
        for (const auto& r : prog.resources)
            if (!resource_names.insert(r.name).second)
                throw ParseError(r.line, r.col, "duplicate resource declaration '" + r.name + "'");

        for (const auto& t : prog.trusts) {
            std::string key = pred_key(t.pred, static_cast<size_t>(t.arity));
            if (!defined.count(key))
                throw ParseError(t.line, t.col, "trust for undefined predicate " + key);
        }
    }
};

}  // namespace

Program parse_program(const std::string& text, const std::string& filename) {
    Parser p(text);
    p.prog.filename = filename;
    p.run();
    p.check();
    return std::move(p.prog);
}

Clause normalize_clause(const Clause& c) {
    std::vector<std::string> used;
    collect_vars(c.head, used);
    for (const auto& lit : c.body) collect_vars(lit.atom, used);
    std::set<std::string> used_set(used.begin(), used.end());

    bool already = true;
    std::set<std::string> seen;
    for (const auto& a : c.head->args) {
        if (a->kind != Term::Kind::Var || !seen.insert(a->name).second) {
            already = false;
            break;
        }
    }
    if (already) return c;

    Clause out;
    out.line = c.line;
    out.col = c.col;
    int fresh = 0;
    auto fresh_var = [&]() {
        std::string name;
        do {
            name = "_V" + std::to_string(fresh++);
        } while (used_set.count(name));
        used_set.insert(name);
        return mk_var(name);
    };

    std::vector<TermPtr> head_args;
    std::vector<Literal> prefix;
    seen.clear();
    for (const auto& a : c.head->args) {
        if (a->kind == Term::Kind::Var && seen.insert(a->name).second) {
            head_args.push_back(a);
        } else {
            TermPtr v = fresh_var();
            head_args.push_back(v);
            prefix.push_back(Literal{mk_comp("=", {v, a}), c.line, c.col});
        }
    }
    out.head = mk_comp(c.head->name, std::move(head_args));
    out.head_prefix = static_cast<int>(prefix.size());
    out.body = std::move(prefix);
    out.body.insert(out.body.end(), c.body.begin(), c.body.end());
    return out;
}

Program normalize_program(const Program& p) {
    Program out = p;
    for (auto& c : out.clauses) c = normalize_clause(c);
    return out;
}

}  // namespace sra
