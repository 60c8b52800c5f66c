#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace qsep::cli {

enum ExitCode : int { kSuccess = 0, kClaimFailure = 1, kUsageError = 2, kInternalError = 3 };

/// Environment variable holding the default master seed.
inline constexpr const char* kSeedVariable = "QSEP_SEED";
inline constexpr std::uint64_t kFallbackSeed = 20240601;

/// Seed from QSEP_SEED, or the fallback when unset. Throws ContractViolation
/// on a malformed value.
std::uint64_t default_seed();

/// Full command line front end. Reports go to `out` (or --output), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsep::cli
