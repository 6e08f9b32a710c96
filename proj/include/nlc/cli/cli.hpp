#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one command line. `args` excludes the program name.
/// Exit codes: 0 success, 1 usage error, 2 numerical or convergence error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

/// Environment variable consulted for the default seed.
inline constexpr const char* kSeedEnv = "NLC_SEED";

}  // namespace nlc::cli
