#include "sra/symexpr.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace sra {

namespace {

using Kind = SymExpr::Kind;

SEP make(SymExpr&& e) { return std::make_shared<SymExpr>(std::move(e)); }

int rat_compare(const Rat& a, const Rat& b) {
    if (a < b) return -1;
    if (b < a) return 1;
    return 0;
}

int vec_rat_compare(const std::vector<Rat>& a, const std::vector<Rat>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = 0; i < a.size(); ++i)
        if (int c = rat_compare(a[i], b[i])) return c;
    return 0;
}

}  // namespace

SEP se_const(const Rat& v) {
    SymExpr e;
    e.kind = Kind::Const;
    e.c = v;
    return make(std::move(e));
}

SEP se_int(long long v) { return se_const(Rat(v)); }

SEP se_inf() {
    SymExpr e;
    e.kind = Kind::Inf;
    return make(std::move(e));
}

SEP se_var(const std::string& name) {
    SymExpr e;
    e.kind = Kind::Var;
    e.name = name;
    return make(std::move(e));
}

SEP se_add(std::vector<SEP> kids) {
    std::vector<SEP> flat;
    Rat acc(0);
    bool inf = false;
    std::function<void(const SEP&)> push = [&](const SEP& k) {
        switch (k->kind) {
            case Kind::Add:
                for (const auto& kk : k->kids) push(kk);
                return;
            case Kind::Const:
                acc = acc + k->c;
                return;
            case Kind::Inf:
                inf = true;
                return;
            default:
                flat.push_back(k);
        }
    };
    for (const auto& k : kids) push(k);
    if (inf) return se_inf();
    if (!(acc == Rat(0)) || flat.empty()) flat.push_back(se_const(acc));
    if (flat.size() == 1) return flat[0];
    SymExpr e;
    e.kind = Kind::Add;
    e.kids = std::move(flat);
    return make(std::move(e));
}

SEP se_add2(const SEP& a, const SEP& b) { return se_add({a, b}); }

SEP se_sub(const SEP& a, const SEP& b) { return se_add({a, se_scale(Rat(-1), b)}); }

SEP se_mul(std::vector<SEP> kids) {
    std::vector<SEP> flat;
    Rat acc(1);
    bool inf = false;
    std::function<void(const SEP&)> push = [&](const SEP& k) {
        switch (k->kind) {
            case Kind::Mul:
                for (const auto& kk : k->kids) push(kk);
                return;
            case Kind::Const:
                acc = acc * k->c;
                return;
            case Kind::Inf:
                inf = true;
                return;
            default:
                flat.push_back(k);
        }
    };
    for (const auto& k : kids) push(k);
    // Zero absorbs even infinity: a literal executed zero times costs nothing.
    if (acc == Rat(0)) return se_const(Rat(0));
    if (inf) return se_inf();
    if (flat.empty()) return se_const(acc);
    if (flat.size() == 1 && acc == Rat(1)) return flat[0];
    SymExpr e;
    e.kind = Kind::Mul;
    if (!(acc == Rat(1))) e.kids.push_back(se_const(acc));
    for (auto& k : flat) e.kids.push_back(std::move(k));
    return make(std::move(e));
}

SEP se_mul2(const SEP& a, const SEP& b) { return se_mul({a, b}); }

SEP se_scale(const Rat& k, const SEP& e) { return se_mul({se_const(k), e}); }

static SEP make_minmax(Kind kind, std::vector<SEP> kids) {
    std::vector<SEP> flat;
    std::optional<Rat> acc;
    bool inf = false;
    std::function<void(const SEP&)> push = [&](const SEP& k) {
        if (k->kind == kind) {
            for (const auto& kk : k->kids) push(kk);
            return;
        }
        if (k->kind == Kind::Const) {
            if (!acc)
                acc = k->c;
            else if (kind == Kind::Min)
                acc = (k->c < *acc) ? k->c : *acc;
            else
                acc = (*acc < k->c) ? k->c : *acc;
            return;
        }
        if (k->kind == Kind::Inf) {
            inf = true;
            return;
        }
        flat.push_back(k);
    };
    for (const auto& k : kids) push(k);
    if (kind == Kind::Max && inf) return se_inf();
    if (acc) flat.push_back(se_const(*acc));
    if (flat.empty()) return se_inf();  // min of infinities only
    std::sort(flat.begin(), flat.end(),
              [](const SEP& a, const SEP& b) { return se_compare(a, b) < 0; });
    flat.erase(std::unique(flat.begin(), flat.end(),
                           [](const SEP& a, const SEP& b) { return se_compare(a, b) == 0; }),
               flat.end());
    if (flat.size() == 1) return flat[0];
    SymExpr e;
    e.kind = kind;
    e.kids = std::move(flat);
    return make(std::move(e));
}

SEP se_min(std::vector<SEP> kids) { return make_minmax(Kind::Min, std::move(kids)); }
SEP se_max(std::vector<SEP> kids) { return make_minmax(Kind::Max, std::move(kids)); }

static std::optional<Rat> rat_pow(const Rat& base, long long n) {
    if (n < -62 || n > 62) return std::nullopt;
    Rat r(1);
    Rat b = base;
    long long e = n < 0 ? -n : n;
    while (e > 0) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    if (n < 0) {
        if (r == Rat(0)) return std::nullopt;
        return Rat(1) / r;
    }
    return r;
}

SEP se_pow(const Rat& base, const SEP& exp) {
    if (base == Rat(1)) return se_const(Rat(1));
    if (auto k = se_as_const(exp)) {
        if (k->den == 1) {
            if (auto v = rat_pow(base, k->num)) return se_const(*v);
        }
    }
    SymExpr e;
    e.kind = Kind::Pow;
    e.c = base;
    e.kids = {exp};
    return make(std::move(e));
}

static std::optional<Rat> linrec_value(const std::vector<Rat>& coeffs,
                                       const std::vector<Rat>& inits, const Rat& addc,
                                       long long n) {
    if (n < 0) n = 0;
    if (n > 64) return std::nullopt;
    size_t k = coeffs.size();
    if (static_cast<size_t>(n) < inits.size()) return inits[static_cast<size_t>(n)];
    std::vector<Rat> win = inits;  // win[i] = f(m-k+i) rolling
    for (long long m = static_cast<long long>(k); m <= n; ++m) {
        Rat v = addc;
        for (size_t j = 0; j < k; ++j) v = v + coeffs[j] * win[k - 1 - j];
        win.erase(win.begin());
        win.push_back(v);
    }
    return win.back();
}

SEP se_linrec(std::vector<Rat> coeffs, std::vector<Rat> inits, const Rat& addc,
              const SEP& arg) {
    assert(!coeffs.empty() && coeffs.size() == inits.size());
    if (auto k = se_as_const(arg)) {
        if (k->den == 1)
            if (auto v = linrec_value(coeffs, inits, addc, k->num)) return se_const(*v);
    }
    SymExpr e;
    e.kind = Kind::LinRec;
    e.coeffs = std::move(coeffs);
    e.inits = std::move(inits);
    e.addc = addc;
    e.kids = {arg};
    return make(std::move(e));
}

SEP se_call(const std::string& version, const std::string& slot, std::vector<SEP> args) {
    SymExpr e;
    e.kind = Kind::Call;
    e.name = version;
    e.slot = slot;
    e.kids = std::move(args);
    return make(std::move(e));
}

int se_compare(const SEP& a, const SEP& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
        case Kind::Const:
            return rat_compare(a->c, b->c);
        case Kind::Inf:
            return 0;
        case Kind::Var:
            return a->name < b->name ? -1 : (a->name == b->name ? 0 : 1);
        case Kind::Pow:
            if (int c = rat_compare(a->c, b->c)) return c;
            return se_compare(a->kids[0], b->kids[0]);
        case Kind::Call: {
            if (a->name != b->name) return a->name < b->name ? -1 : 1;
            if (a->slot != b->slot) return a->slot < b->slot ? -1 : 1;
            break;
        }
        case Kind::LinRec: {
            if (int c = vec_rat_compare(a->coeffs, b->coeffs)) return c;
            if (int c = vec_rat_compare(a->inits, b->inits)) return c;
            if (int c = rat_compare(a->addc, b->addc)) return c;
            break;
        }
        default:
            break;
    }
    if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (int c = se_compare(a->kids[i], b->kids[i])) return c;
    return 0;
}

bool se_equal(const SEP& a, const SEP& b) { return se_compare(a, b) == 0; }

bool se_is_inf(const SEP& e) { return e->kind == Kind::Inf; }

std::optional<Rat> se_as_const(const SEP& e) {
    if (e->kind == Kind::Const) return e->c;
    return std::nullopt;
}

bool se_contains_call(const SEP& e) {
    if (e->kind == Kind::Call) return true;
    for (const auto& k : e->kids)
        if (se_contains_call(k)) return true;
    return false;
}

void se_vars(const SEP& e, std::set<std::string>& out) {
    if (e->kind == Kind::Var) out.insert(e->name);
    for (const auto& k : e->kids) se_vars(k, out);
}

SEP se_subst(const SEP& e, const std::map<std::string, SEP>& env) {
    switch (e->kind) {
        case Kind::Const:
        case Kind::Inf:
            return e;
        case Kind::Var: {
            auto it = env.find(e->name);
            return it == env.end() ? e : it->second;
        }
        default:
            break;
    }
    std::vector<SEP> kids;
    kids.reserve(e->kids.size());
    bool changed = false;
    for (const auto& k : e->kids) {
        kids.push_back(se_subst(k, env));
        changed = changed || kids.back().get() != k.get();
    }
    if (!changed) return e;
    switch (e->kind) {
        case Kind::Add:
            return se_add(std::move(kids));
        case Kind::Mul:
            return se_mul(std::move(kids));
        case Kind::Min:
            return se_min(std::move(kids));
        case Kind::Max:
            return se_max(std::move(kids));
        case Kind::Pow:
            return se_pow(e->c, kids[0]);
        case Kind::Call:
            return se_call(e->name, e->slot, std::move(kids));
        case Kind::LinRec:
            return se_linrec(e->coeffs, e->inits, e->addc, kids[0]);
        default:
            return e;
    }
}

SEP se_subst_calls(const SEP& e,
                   const std::function<std::optional<SEP>(const SymExpr&)>& f) {
    if (e->kids.empty() && e->kind != Kind::Call) return e;
    std::vector<SEP> kids;
    kids.reserve(e->kids.size());
    for (const auto& k : e->kids) kids.push_back(se_subst_calls(k, f));
    switch (e->kind) {
        case Kind::Add:
            return se_add(std::move(kids));
        case Kind::Mul:
            return se_mul(std::move(kids));
        case Kind::Min:
            return se_min(std::move(kids));
        case Kind::Max:
            return se_max(std::move(kids));
        case Kind::Pow:
            return se_pow(e->c, kids[0]);
        case Kind::LinRec:
            return se_linrec(e->coeffs, e->inits, e->addc, kids[0]);
        case Kind::Call: {
            SEP fresh = se_call(e->name, e->slot, std::move(kids));
            if (auto r = f(*fresh)) return *r;
            return fresh;
        }
        default:
            return e;
    }
}

// ---------------------------------------------------------------------------
// Polynomial normal form

namespace {

struct Mono {
    std::vector<std::pair<SEP, int>> fs;  // canonical atoms with exponents, sorted
};

int mono_compare(const Mono& a, const Mono& b) {
    if (a.fs.size() != b.fs.size()) return a.fs.size() < b.fs.size() ? -1 : 1;
    for (size_t i = 0; i < a.fs.size(); ++i) {
        if (int c = se_compare(a.fs[i].first, b.fs[i].first)) return c;
        if (a.fs[i].second != b.fs[i].second)
            return a.fs[i].second < b.fs[i].second ? -1 : 1;
    }
    return 0;
}

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const { return mono_compare(a, b) < 0; }
};

struct Poly {
    bool inf = false;
    std::map<Mono, Rat, MonoLess> terms;
};

constexpr size_t kTermCap = 400;

void poly_add_term(Poly& p, const Mono& m, const Rat& c) {
    auto [it, fresh] = p.terms.emplace(m, c);
    if (!fresh) {
        it->second = it->second + c;
        if (it->second == Rat(0)) p.terms.erase(it);
    } else if (c == Rat(0)) {
        p.terms.erase(it);
    }
}

Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    size_t i = 0, j = 0;
    while (i < a.fs.size() || j < b.fs.size()) {
        if (j == b.fs.size()) {
            r.fs.push_back(a.fs[i++]);
        } else if (i == a.fs.size()) {
            r.fs.push_back(b.fs[j++]);
        } else {
            int c = se_compare(a.fs[i].first, b.fs[j].first);
            if (c < 0)
                r.fs.push_back(a.fs[i++]);
            else if (c > 0)
                r.fs.push_back(b.fs[j++]);
            else {
                r.fs.emplace_back(a.fs[i].first, a.fs[i].second + b.fs[j].second);
                ++i;
                ++j;
            }
        }
    }
    return r;
}

bool poly_mul(Poly& a, const Poly& b) {
    if (a.inf || b.inf) {
        // 0 * inf = 0
        bool a_zero = !a.inf && a.terms.empty();
        bool b_zero = !b.inf && b.terms.empty();
        if (a_zero || b_zero) {
            a = Poly{};
            return true;
        }
        a = Poly{};
        a.inf = true;
        return true;
    }
    Poly r;
    for (const auto& [ma, ca] : a.terms)
        for (const auto& [mb, cb] : b.terms) {
            poly_add_term(r, mono_mul(ma, mb), ca * cb);
            if (r.terms.size() > kTermCap) return false;
        }
    a = std::move(r);
    return true;
}

bool to_poly(const SEP& e, Poly& out);

// Rebuilds a non-polynomial node with canonicalized children so it can serve
// as an atomic factor.
SEP canon_atom(const SEP& e) {
    std::vector<SEP> kids;
    kids.reserve(e->kids.size());
    for (const auto& k : e->kids) kids.push_back(se_canon(k));
    switch (e->kind) {
        case Kind::Min:
            return se_min(std::move(kids));
        case Kind::Max:
            return se_max(std::move(kids));
        case Kind::Pow:
            return se_pow(e->c, kids[0]);
        case Kind::Call:
            return se_call(e->name, e->slot, std::move(kids));
        case Kind::LinRec:
            return se_linrec(e->coeffs, e->inits, e->addc, kids[0]);
        default:
            return e;
    }
}

bool to_poly(const SEP& e, Poly& out) {
    switch (e->kind) {
        case Kind::Const:
            poly_add_term(out, Mono{}, e->c);
            return true;
        case Kind::Inf:
            out.inf = true;
            return true;
        case Kind::Var: {
            Mono m;
            m.fs.emplace_back(e, 1);
            poly_add_term(out, m, Rat(1));
            return true;
        }
        case Kind::Add: {
            for (const auto& k : e->kids) {
                Poly pk;
                if (!to_poly(k, pk)) return false;
                if (pk.inf) {
                    out = Poly{};
                    out.inf = true;
                    return true;
                }
                for (const auto& [m, c] : pk.terms) poly_add_term(out, m, c);
                if (out.terms.size() > kTermCap) return false;
            }
            return true;
        }
        case Kind::Mul: {
            Poly acc;
            poly_add_term(acc, Mono{}, Rat(1));
            for (const auto& k : e->kids) {
                Poly pk;
                if (!to_poly(k, pk)) return false;
                if (!poly_mul(acc, pk)) return false;
            }
            out = std::move(acc);
            return true;
        }
        default: {
            SEP atom = canon_atom(e);
            // Canonicalization may fold the atom to something simpler.
            if (atom->kind != e->kind || atom.get() != e.get()) {
                if (atom->kind == Kind::Const || atom->kind == Kind::Inf ||
                    atom->kind == Kind::Var || atom->kind == Kind::Add ||
                    atom->kind == Kind::Mul)
                    return to_poly(atom, out);
            }
            Mono m;
            m.fs.emplace_back(atom, 1);
            poly_add_term(out, m, Rat(1));
            return true;
        }
    }
}

size_t mono_degree(const Mono& m) {
    size_t d = 0;
    for (const auto& [f, k] : m.fs) d += static_cast<size_t>(k);
    return d;
}

SEP from_poly(const Poly& p) {
    if (p.inf) return se_inf();
    std::vector<std::pair<Mono, Rat>> terms(p.terms.begin(), p.terms.end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        size_t da = mono_degree(a.first), db = mono_degree(b.first);
        if (da != db) return da > db;
        return mono_compare(a.first, b.first) < 0;
    });
    std::vector<SEP> addends;
    for (const auto& [m, c] : terms) {
        std::vector<SEP> fs;
        if (!(c == Rat(1)) || m.fs.empty()) fs.push_back(se_const(c));
        for (const auto& [f, k] : m.fs)
            for (int i = 0; i < k; ++i) fs.push_back(f);
        addends.push_back(se_mul(std::move(fs)));
    }
    return se_add(std::move(addends));
}

}  // namespace

SEP se_canon(const SEP& e) {
    Poly p;
    if (!to_poly(e, p)) return e;  // too large to expand; keep the light form
    return from_poly(p);
}

// ---------------------------------------------------------------------------
// Evaluation

Val val_add(const Val& a, const Val& b) {
    if (a.inf || b.inf) return Val{true, Rat(0)};
    return Val{false, a.q + b.q};
}

Val val_mul(const Val& a, const Val& b) {
    if ((!a.inf && a.q == Rat(0)) || (!b.inf && b.q == Rat(0))) return Val{false, Rat(0)};
    if (a.inf || b.inf) return Val{true, Rat(0)};
    return Val{false, a.q * b.q};
}

bool val_le(const Val& a, const Val& b) {
    if (b.inf) return true;
    if (a.inf) return false;
    return !(b.q < a.q);
}

std::string val_str(const Val& v) { return v.inf ? "inf" : v.q.str(); }

std::optional<Val> se_eval(const SEP& e, const std::map<std::string, Rat>& env,
                           const CallEval& calls) {
    switch (e->kind) {
        case Kind::Const:
            return Val{false, e->c};
        case Kind::Inf:
            return Val{true, Rat(0)};
        case Kind::Var: {
            auto it = env.find(e->name);
            if (it == env.end()) return std::nullopt;
            return Val{false, it->second};
        }
        case Kind::Add: {
            Val acc{false, Rat(0)};
            for (const auto& k : e->kids) {
                auto v = se_eval(k, env, calls);
                if (!v) return std::nullopt;
                acc = val_add(acc, *v);
            }
            return acc;
        }
        case Kind::Mul: {
            Val acc{false, Rat(1)};
            for (const auto& k : e->kids) {
                auto v = se_eval(k, env, calls);
                if (!v) return std::nullopt;
                acc = val_mul(acc, *v);
            }
            return acc;
        }
        case Kind::Min:
        case Kind::Max: {
            std::optional<Val> acc;
            for (const auto& k : e->kids) {
                auto v = se_eval(k, env, calls);
                if (!v) return std::nullopt;
                if (!acc) {
                    acc = *v;
                } else if (e->kind == Kind::Min) {
                    if (val_le(*v, *acc)) acc = *v;
                } else {
                    if (val_le(*acc, *v)) acc = *v;
                }
            }
            return acc;
        }
        case Kind::Pow: {
            auto x = se_eval(e->kids[0], env, calls);
            if (!x) return std::nullopt;
            if (x->inf) {
                if (e->c == Rat(1)) return Val{false, Rat(1)};
                if (Rat(1) < e->c) return Val{true, Rat(0)};
                return std::nullopt;
            }
            if (x->q.den != 1) return std::nullopt;
            auto v = rat_pow(e->c, x->q.num);
            if (!v) return std::nullopt;
            return Val{false, *v};
        }
        case Kind::LinRec: {
            auto x = se_eval(e->kids[0], env, calls);
            if (!x || x->inf || x->q.den != 1) return std::nullopt;
            auto v = linrec_value(e->coeffs, e->inits, e->addc, x->q.num);
            if (!v) return std::nullopt;
            return Val{false, *v};
        }
        case Kind::Call: {
            if (!calls) return std::nullopt;
            std::vector<Val> args;
            args.reserve(e->kids.size());
            for (const auto& k : e->kids) {
                auto v = se_eval(k, env, calls);
                if (!v) return std::nullopt;
                args.push_back(*v);
            }
            return calls(*e, args);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dominance

bool se_dominates(const SEP& a, const SEP& b, const std::map<std::string, Rat>& lows) {
    if (se_is_inf(a)) return true;
    if (se_is_inf(b)) return false;
    SEP diff = se_sub(a, b);
    // Shift every bounded variable down to zero: v := v' + low(v), v' >= 0.
    std::map<std::string, SEP> shift;
    for (const auto& [v, lo] : lows)
        if (!(lo == Rat(0))) shift[v] = se_add2(se_var(v), se_const(lo));
    if (!shift.empty()) diff = se_subst(diff, shift);
    Poly p;
    {
        // Reuse the canonical expansion; on blow-up fall back to equality.
        SEP c = se_canon(diff);
        Poly q;
        if (!to_poly(c, q)) return se_equal(se_canon(a), se_canon(b));
        p = std::move(q);
    }
    if (p.inf) return true;
    for (const auto& [m, c] : p.terms) {
        if (c < Rat(0)) return false;
        for (const auto& [f, k] : m.fs)
            if (f->kind == Kind::Var && !lows.count(f->name)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

bool needs_mul_parens(const SEP& e) { return e->kind == Kind::Add; }

void print_se(std::ostream& os, const SEP& e);

void print_mul(std::ostream& os, const SEP& e) {
    // Group equal adjacent factors as f^k.
    const auto& ks = e->kids;
    size_t i = 0;
    bool first = true;
    if (!ks.empty() && ks[0]->kind == Kind::Const) {
        if (ks[0]->c == Rat(-1)) {
            os << '-';
        } else {
            os << ks[0]->c.str();
            first = false;
        }
        i = 1;
    }
    for (; i < ks.size();) {
        size_t j = i;
        while (j < ks.size() && se_compare(ks[i], ks[j]) == 0) ++j;
        if (!first) os << '*';
        first = false;
        bool wrap = needs_mul_parens(ks[i]);
        if (wrap) os << '(';
        print_se(os, ks[i]);
        if (wrap) os << ')';
        if (j - i > 1) os << '^' << (j - i);
        i = j;
    }
}

void print_se(std::ostream& os, const SEP& e) {
    switch (e->kind) {
        case Kind::Const:
            os << e->c.str();
            return;
        case Kind::Inf:
            os << "inf";
            return;
        case Kind::Var:
            os << e->name;
            return;
        case Kind::Add: {
            bool first = true;
            for (const auto& k : e->kids) {
                std::ostringstream part;
                print_se(part, k);
                std::string s = part.str();
                if (!first && !s.empty() && s[0] != '-') os << '+';
                os << s;
                first = false;
            }
            return;
        }
        case Kind::Mul:
            print_mul(os, e);
            return;
        case Kind::Min:
        case Kind::Max: {
            os << (e->kind == Kind::Min ? "min(" : "max(");
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << ',';
                print_se(os, e->kids[i]);
            }
            os << ')';
            return;
        }
        case Kind::Pow: {
            os << e->c.str() << '^';
            const SEP& x = e->kids[0];
            if (x->kind == Kind::Var || x->kind == Kind::Const) {
                print_se(os, x);
            } else {
                os << '(';
                print_se(os, x);
                os << ')';
            }
            return;
        }
        case Kind::Call: {
            os << e->name << '.' << e->slot << '(';
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) os << ',';
                print_se(os, e->kids[i]);
            }
            os << ')';
            return;
        }
        case Kind::LinRec: {
            os << "linrec(";
            for (size_t i = 0; i < e->coeffs.size(); ++i) {
                if (i) os << ',';
                os << e->coeffs[i].str();
            }
            os << ';';
            for (size_t i = 0; i < e->inits.size(); ++i) {
                if (i) os << ',';
                os << e->inits[i].str();
            }
            os << ';' << e->addc.str() << ';';
            print_se(os, e->kids[0]);
            os << ')';
            return;
        }
    }
}

}  // namespace

std::string se_str(const SEP& e) {
    std::ostringstream os;
    print_se(os, e);
    return os.str();
}

}  // namespace sra
