#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bergcov::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr const char* kSeedEnv = "BERGCOV_SEED";

enum ExitCode : int { kSuccess = 0, kIdentityFailure = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name). Reports go to `out`
/// (or the --output file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bergcov::cli
