#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hgcode {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a check or validation failed, or input could not be processed
inline constexpr int kExitUsage = 2;

// Runs one invocation. args[0] is the program name. Machine output goes to
// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hgcode
