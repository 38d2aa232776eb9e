#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avprof {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Runs the `avprof` command line. `args` excludes the program name. Value
/// precedence per option: command-line flag, then AVPROF_<NAME> environment
/// variable, then the --config JSON file, then the built-in default.
/// Returns 0 on success, 1 on runtime or I/O failure, 2 on configuration errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace avprof
