// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "natclock/bounds.hpp"

namespace natclock {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "natclock.manifest/1";

struct ExperimentConfig {
  std::vector<std::string> processes;
  std::optional<std::string> grid;           // default chosen per process
  std::optional<std::string> envelope_grid;  // default chosen per process
  std::vector<double> levels = {1.0};
  std::size_t n_paths = 10000;
  std::size_t n_envelope_paths = 0;  // 0: n_paths
  std::uint64_t seed = 1;
  std::vector<std::string> checks;  // empty: bounds runs the per-process checks, report runs all
  std::string out_dir = ".";
  unsigned workers = 1;
  std::vector<int> d_list;  // table1 / Bessel experiments
  double z_crit = 4.0;
  double max_censored = 0.001;
};

/// Parses a JSON config object. Unknown keys and bad values throw config.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// Every check name accepted by --checks, in run order.
const std::vector<std::string>& known_checks();
/// Throws config naming the first problem: unknown check, unparseable
/// process or grid, bad counts.
void validate_config(const ExperimentConfig& config);

struct OutputFile {
  std::string name;
  std::string data;
};

struct RunResult {
  std::vector<OutputFile> files;
  std::vector<BoundReport> reports;
  std::vector<std::string> warnings;
  std::string summary;  // human-readable text for stdout
  bool complete = true;
  double wall_seconds = 0.0;

  bool any_fail() const noexcept;
};

/// Commands: zoo, estimate, hit, bounds, table1, report. A set cancel flag
/// stops the run between jobs and marks the outputs incomplete.
RunResult run_command(const std::string& command, const ExperimentConfig& config,
                      const std::atomic<bool>* cancel = nullptr);

std::string zoo_table();

/// Writes each file as dir/name via a temporary file and rename. Also writes
/// timing.json, which is the only output that varies between identical runs.
void write_outputs(const RunResult& result, const std::string& dir);

}  // namespace natclock
