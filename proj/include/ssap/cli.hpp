#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssap::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsageError = 1, kRuntimeError = 2 };

// Entry point for the `ssap` tool. args excludes the program name. Human
// summaries go to `out`, diagnostics to `err`; machine-readable output goes
// to the --out files (or `out` when a subcommand has no --out given).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssap::cli
