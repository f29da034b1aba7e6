#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coxgibbs::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsage = 2,
};

/// Runs `coxgibbs <args...>` (args excludes the program name). Diagnostics
/// go to `err`, progress and summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Thread count from COXGIBBS_THREADS (0 = single-threaded reference mode).
int threads_from_env();

/// FNV-1a 64-bit digest as 16 hex characters.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace coxgibbs::cli
