#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkd/engine.hpp"
#include "qkd/topology.hpp"

namespace qkd {

struct CapacityVerdict {
  double lambda_star = 0.0;
  std::vector<double> edge_flow; // per edge id at the optimum
  std::string method;
};

struct FlowArc {
  int from = 0;
  int to = 0;
  double capacity = 0.0;
};

/// Dinic's algorithm on real capacities. Returns the flow value and the
/// flow on each input arc.
double max_flow(int node_count, const std::vector<FlowArc>& arcs, int source, int sink,
                std::vector<double>* arc_flow = nullptr);

/// Boundary rate of a single unicast class: the s-t max flow of the graph
/// with capacities omega_e = min(gamma_e, eta_e).
CapacityVerdict unicast_capacity(const NetworkGraph& g, NodeId s, NodeId t);

enum class Stability { Stable, Unstable, Inconclusive };
std::string to_string(Stability s);

struct StabilityVerdict {
  double slope = 0.0;        // least-squares slope over the trailing window
  double time_average = 0.0; // mean of the whole series
  Stability verdict = Stability::Inconclusive;
};

double least_squares_slope(std::span<const double> ys);

/// Stable when the trailing-window slope is below slope_tol and the time
/// average does not exceed `envelope` (when given); Unstable when the slope
/// exceeds 10 * slope_tol; Inconclusive otherwise. Requires at least
/// 2 * window samples.
StabilityVerdict stability_test(std::span<const double> series, std::size_t window, double slope_tol,
                                std::optional<double> envelope = std::nullopt);

inline constexpr std::size_t kDefaultStabilityWindow = 20000;
inline constexpr double kDefaultSlopeTol = 1e-3;

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0; // standard error of the mean; 0 for a single sample
  int samples = 0;
};

/// Mean and standard error (sample standard deviation / sqrt(n)).
Estimate estimate(std::span<const double> xs);

struct ClassSummary {
  std::optional<Estimate> mean_delay; // absent when no seed delivered anything
  Estimate delivered_rate;
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
};

struct RunSummary {
  std::string policy;
  int seeds = 0;
  std::optional<Estimate> mean_delay;
  Estimate mean_residual_keys;
  Estimate mean_backlog;
  std::vector<ClassSummary> classes;
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t in_flight = 0;
  bool conserved = true; // arrivals == delivered + in_flight + dropped
};

/// Aggregates independent runs (one per seed) of the same cell.
RunSummary summarize(std::span<const MetricsRecord> runs);

nlohmann::json summary_to_json(const RunSummary& s);

} // namespace qkd
