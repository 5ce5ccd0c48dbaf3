#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace limsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // verification mismatch or runtime error
inline constexpr int kExitUsage = 2;

/// Entry point of the `limsim` tool. `args[0]` is the program name.
/// Subcommands: characterize, map, run, sweep, verify.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace limsim
