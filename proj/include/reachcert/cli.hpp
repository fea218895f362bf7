#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reachcert::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInfeasible = 2;  // infeasible, TooCoarse or singular
inline constexpr int kBudget = 3;      // step budget exhausted
inline constexpr int kInputError = 4;  // bad flags, config or input files

/// Runs the command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reachcert::cli
