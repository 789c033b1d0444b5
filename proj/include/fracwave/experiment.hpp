#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fracwave {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit codes of the experiment runner.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitValidation = 2,
  kExitNumerical = 3,
  kExitCheckFailed = 4,
};

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;  // key=value, dotted keys, JSON values
  unsigned workers = 0;
  bool check = false;
  /// Value of FRACWAVE_SEED; the environment is read by the caller.
  std::optional<std::string> env_seed;
};

/// 64-bit FNV-1a of the bytes of `text`.
std::uint64_t fnv1a64(const std::string& text);

/// Parses and validates a config document, applies the environment seed and
/// then the overrides (flag > env > config), and returns the canonical
/// echoed config with every default filled in. Throws DomainError on any
/// schema or invariant violation.
std::string materialize_config(const std::string& json_text, const std::vector<std::string>& overrides,
                               const std::optional<std::string>& env_seed = std::nullopt);

/// Runs one experiment, writes its CSV files, config.json and manifest.json
/// into out_dir and returns an ExitCode. Diagnostics go to `log`.
int run_experiment(const RunOptions& options, std::ostream& log);

}  // namespace fracwave
