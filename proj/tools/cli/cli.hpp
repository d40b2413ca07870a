#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atdecor::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasibleProved = 10;
inline constexpr int kExitInfeasiblePresumed = 11;
inline constexpr int kExitUnknown = 12;

// Runs one command line (without the program name). JSON output is a single
// document on `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atdecor::cli
