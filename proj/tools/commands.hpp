// Command-line front end. Every subcommand is deterministic given its flags.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rllfbc::cli {

enum ExitCode : int { kOk = 0, kInvalidArguments = 2, kExhausted = 3 };

/// Thrown for arguments that parse but fail validation; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses "start:end:step" into the inclusive list of points, each in [0,1].
std::vector<double> parse_sweep(const std::string& spec);

/// Seed from RLLFBC_SEED, or 0 when unset. Throws UsageError when malformed.
std::uint64_t seed_from_env();

/// SplitMix64 step; derives per-trial seeds from the base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Parses argv and runs one subcommand. Data goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rllfbc::cli
