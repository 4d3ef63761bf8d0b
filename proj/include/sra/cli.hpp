#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sra {

// Command-line driver. `args` excludes the program name. Exit codes:
// 0 success; 1 strict-mode diagnostics, bound violations, or golden
// mismatches; 2 unreadable input, parse/type errors, bad usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace sra
