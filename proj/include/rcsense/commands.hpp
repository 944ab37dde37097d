#pragma once

// Scenario runners behind the rcsense CLI. Each writes its artifacts under
// an output directory together with manifest.json (resolved config, seed,
// SHA-256 of every file written).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rcsense/config.hpp"
#include "rcsense/error.hpp"

namespace rcsense {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: the config's output entry
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool validate_integration = false;  // sweet: repeat every run at dt/10
};

struct RunReport {
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // relative to out_dir, manifest excluded
  std::vector<std::string> warnings;
};

/// Applies option overrides (seed, output) to `config`.
[[nodiscard]] ExperimentConfig apply_options(ExperimentConfig config, const RunOptions& opts);

/// Runs the scenario and writes its files and manifest. Errors carry the
/// offending run in their message.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& opts,
                         std::ostream& log);

struct CheckReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Verifies the files in the output directory against its manifest, then
/// re-runs the experiment in a scratch directory and compares digests.
[[nodiscard]] CheckReport check_experiment(const ExperimentConfig& config,
                                           const RunOptions& opts, std::ostream& log);

/// 1 invalid argument / config, 2 numeric, 3 I/O.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

}  // namespace rcsense
