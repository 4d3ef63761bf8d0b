#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sra/util.hpp"

namespace sra {

// Symbolic cost/size expressions: rational-coefficient polynomials over
// atomic factors (variables, min/max terms, exponentials, linear-recurrence
// values, and unresolved calls to other cost functions), plus an explicit
// infinity for "no bound".
struct SymExpr;
using SEP = std::shared_ptr<const SymExpr>;

struct SymExpr {
    enum class Kind { Const, Inf, Var, Add, Mul, Min, Max, Pow, Call, LinRec };
    Kind kind = Kind::Const;
    Rat c;                   // Const value; Pow base
    std::string name;        // Var name; Call target version
    std::string slot;        // Call slot within the target (e.g. a resource bound)
    std::vector<SEP> kids;   // Add/Mul/Min/Max operands; Call args; Pow {exp}; LinRec {arg}
    std::vector<Rat> coeffs; // LinRec: coefficients of f(n-1) ... f(n-k)
    std::vector<Rat> inits;  // LinRec: values at n = 0 ... k-1
    Rat addc;                // LinRec: constant inhomogeneous part
};

SEP se_const(const Rat& v);
SEP se_int(long long v);
SEP se_inf();
SEP se_var(const std::string& name);
SEP se_add(std::vector<SEP> kids);
SEP se_add2(const SEP& a, const SEP& b);
SEP se_sub(const SEP& a, const SEP& b);
SEP se_mul(std::vector<SEP> kids);
SEP se_mul2(const SEP& a, const SEP& b);
SEP se_scale(const Rat& k, const SEP& e);
SEP se_min(std::vector<SEP> kids);
SEP se_max(std::vector<SEP> kids);
SEP se_pow(const Rat& base, const SEP& exp);
SEP se_call(const std::string& version, const std::string& slot, std::vector<SEP> args);
SEP se_linrec(std::vector<Rat> coeffs, std::vector<Rat> inits, const Rat& addc, const SEP& arg);

int se_compare(const SEP& a, const SEP& b);
bool se_equal(const SEP& a, const SEP& b);
bool se_is_inf(const SEP& e);
std::optional<Rat> se_as_const(const SEP& e);
bool se_contains_call(const SEP& e);
void se_vars(const SEP& e, std::set<std::string>& out);
std::string se_str(const SEP& e);

SEP se_subst(const SEP& e, const std::map<std::string, SEP>& env);
// Rewrites call atoms bottom-up; a nullopt keeps the call (with substituted
// arguments) unchanged.
SEP se_subst_calls(const SEP& e,
                   const std::function<std::optional<SEP>(const SymExpr&)>& f);

// Polynomial normal form: sums of monomials over canonicalized atomic
// factors, merged and sorted. Structural equality of canonical forms is the
// expression equality used throughout.
SEP se_canon(const SEP& e);

struct Val {
    bool inf = false;
    Rat q;
};
Val val_add(const Val& a, const Val& b);
Val val_mul(const Val& a, const Val& b);
bool val_le(const Val& a, const Val& b);
std::string val_str(const Val& v);

using CallEval =
    std::function<std::optional<Val>(const SymExpr&, const std::vector<Val>&)>;

// Evaluates under a variable environment; nullopt when a call atom cannot be
// resolved or an exponent/recurrence argument is not a (bounded) integer.
std::optional<Val> se_eval(const SEP& e, const std::map<std::string, Rat>& env,
                           const CallEval& calls = nullptr);

// Sound sufficient check for a >= b over all assignments where each variable
// sits at or above its entry in `lows`; variables absent from `lows` are
// unconstrained in sign and must cancel. Atomic factors are assumed >= 0.
bool se_dominates(const SEP& a, const SEP& b, const std::map<std::string, Rat>& lows);

}  // namespace sra
