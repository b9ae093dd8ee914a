#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace fixprice {

/// What one invocation asked for, collected after parsing.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> flags;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_path;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line front end. Primary output goes to `out` unless
/// --output is given; diagnostics go to `err` as a single line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fixprice
