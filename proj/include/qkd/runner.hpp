#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkd/analysis.hpp"
#include "qkd/config.hpp"

namespace qkd {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed; // replaces the seed list
  std::optional<int> workers;
  std::string base_dir = "."; // resolves relative graph file paths
};

struct CellSummary {
  std::string policy;
  std::string rate; // sweep value, or "base" without a sweep
  RunSummary summary;
  int stable = 0;
  int unstable = 0;
  int inconclusive = 0; // includes seeds too short to judge
};

struct RunResult {
  std::string output_dir;
  std::string config_hash;
  std::vector<std::string> files; // relative to output_dir, manifest excluded
  std::vector<CellSummary> cells;
};

/// Rate label used in file names and as the comparison join key.
std::string rate_label(std::optional<double> rate);

/// One simulation per policy x sweep value x seed on a bounded worker pool;
/// writes per-cell JSON (and CSV series when enabled), summary.csv,
/// aggregate.json, config.json and manifest.json.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Joins the aggregate tables of completed runs by sweep value. Throws
/// RunError when the sweep axes differ.
std::string compare_runs(const std::vector<std::string>& dirs);

} // namespace qkd
