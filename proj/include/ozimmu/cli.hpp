#pragma once

// Command-line front end. Every command writes one CSV (stdout or --out) and,
// when the CSV goes to a file or --manifest is given, a JSON run manifest that
// `replay` can re-execute.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ozimmu::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInfeasible = 3,
  kResourceCap = 4,
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "2^11", "2048".
std::uint64_t parse_count(std::string_view text);

/// Lowercase hex FNV-1a over the bit patterns of the values.
std::string checksum(const double* values, std::size_t count);

}  // namespace ozimmu::cli
