#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dynres::cli {

// Exit codes: 0 success, 1 input error (bad files/values), 2 usage error,
// 3 internal invariant violation.
inline constexpr int exit_ok = 0;
inline constexpr int exit_input = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_internal = 3;

// Run one CLI invocation. `args` excludes the program name. Output goes to
// the given streams, which the process entry point binds to stdout/stderr.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace dynres::cli
