#pragma once

#include <string>
#include <vector>

namespace pbern::cli {

// Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
// 4 infeasible geometry or constraint (LambdaTooLarge / EmptyAnnulus / ...).
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_nonconvergence = 3;
inline constexpr int exit_infeasible = 4;

// Full command line entry point (argv[0] is the program name).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

// Dispatch a flat key=value config file through its "command" key.
int run_config(const std::string& path);

} // namespace pbern::cli
