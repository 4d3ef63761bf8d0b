#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sra {

// Exact rational with int64 parts. Coefficients in closed forms stay tiny;
// overflow checks are asserts, not a bignum substitute.
struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) : num(n), den(d) { reduce(); }

    void reduce() {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    bool is_int() const { return den == 1; }
    bool is_zero() const { return num == 0; }
    bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const {
        return (__int128)num * o.den < (__int128)o.num * den;
    }

    Rat operator+(const Rat& o) const {
        return Rat(num * o.den + o.num * den, den * o.den);
    }
    Rat operator-(const Rat& o) const {
        return Rat(num * o.den - o.num * den, den * o.den);
    }
    Rat operator*(const Rat& o) const { return Rat(num * o.num, den * o.den); }
    Rat operator/(const Rat& o) const {
        if (o.num == 0) throw std::domain_error("rational division by zero");
        return Rat(num * o.den, den * o.num);
    }
    Rat operator-() const { return Rat(-num, den); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

// Extended integer: finite int64 or +infinity. Lower-bound fallbacks use 0,
// so negative infinity never arises.
struct Ext {
    bool inf = false;
    long long v = 0;

    Ext() = default;
    Ext(long long x) : inf(false), v(x) {}
    static Ext infinity() { Ext e; e.inf = true; return e; }

    bool operator==(const Ext& o) const {
        return inf == o.inf && (inf || v == o.v);
    }
    bool operator<(const Ext& o) const {
        if (inf) return false;
        if (o.inf) return true;
        return v < o.v;
    }
    bool operator<=(const Ext& o) const { return *this < o || *this == o; }

    Ext operator+(const Ext& o) const {
        if (inf || o.inf) return infinity();
        return Ext(v + o.v);
    }
    Ext operator*(const Ext& o) const {
        if (inf || o.inf) {
            // 0 * inf is 0: a literal executed zero times costs nothing.
            if ((!inf && v == 0) || (!o.inf && o.v == 0)) return Ext(0);
            return infinity();
        }
        return Ext(v * o.v);
    }

    std::string str() const { return inf ? "∞" : std::to_string(v); }
};

inline Ext ext_min(const Ext& a, const Ext& b) { return a < b ? a : b; }
inline Ext ext_max(const Ext& a, const Ext& b) { return a < b ? b : a; }

template <typename T>
std::string join(const std::vector<T>& xs, const std::string& sep,
                 std::string (*tostr)(const T&)) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += tostr(xs[i]);
    }
    return out;
}

inline std::string join_strings(const std::vector<std::string>& xs,
                                const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

}  // namespace sra
