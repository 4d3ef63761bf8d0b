#pragma once

#include <stdexcept>
#include <string>

#include "sra/ast.hpp"

namespace sra {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(int line_, int col_, const std::string& msg);
};

// Parses a program in Edinburgh-style syntax with the directive set
// regtype/entry/resource/trust. Throws ParseError on syntax errors,
// unsupported constructs (;, ->, !, \+, mod, ...), and declaration
// inconsistencies (entry for an undefined predicate, unknown type name,
// duplicate declarations).
Program parse_program(const std::string& text, const std::string& filename = "");

// Rewrites a clause so its head arguments are distinct variables; the
// replaced arguments become leading unification literals (the clause's
// head_prefix). Idempotent.
Clause normalize_clause(const Clause& c);
Program normalize_program(const Program& p);

bool is_builtin(const std::string& name, size_t arity);
bool is_comparison(const std::string& name);

}  // namespace sra
