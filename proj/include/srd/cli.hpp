#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "srd/config.hpp"

namespace srd::cli {

/// Process exit codes.
enum ExitCode : int {
  kPass = 0,          // certified-SRD, or every check passed
  kInternal = 1,      // unexpected failure
  kInconclusive = 2,  // certificate not established
  kRejected = 3,      // invalid input, rejection, or a failed check
};

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputEnv = "SRDCERT_OUTPUT_DIR";

struct RunOptions {
  std::optional<std::filesystem::path> output;  // wins over the env var and the config
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

/// Reads the config file, runs its command, writes the artifacts and
/// returns an ExitCode. Messages go to `out`, diagnostics to `err`.
int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
        std::ostream& err);

/// Same, from already parsed text.
int run(const config::RawConfig& raw, const RunOptions& options, std::ostream& out,
        std::ostream& err);

}  // namespace srd::cli
