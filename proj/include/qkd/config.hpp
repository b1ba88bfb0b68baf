#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkd/engine.hpp"
#include "qkd/keying.hpp"
#include "qkd/policy.hpp"
#include "qkd/topology.hpp"
#include "qkd/traffic.hpp"

namespace qkd {

struct GraphSource {
  enum class Kind { Inline, File, ErdosRenyi };
  Kind kind = Kind::Inline;
  int nodes = 0;
  std::vector<EdgeSpec> edges; // inline
  std::string path;            // file
  double p = 0.3;              // erdos_renyi
  int gamma = 1;
  double eta_min = 0.2;
  double eta_max = 1.0;
  std::uint64_t seed = 1;

  bool operator==(const GraphSource&) const = default;
};

/// Security level and priority of one class stamped out per generated pair.
struct ClassVariant {
  Security security = Security::Quantum;
  int priority = 0;
  bool operator==(const ClassVariant&) const = default;
};

/// Draws `count` random sources (and destination sets) and emits one class
/// per variant for each draw, so variants share endpoints and load.
struct TrafficGenerator {
  TrafficKind kind = TrafficKind::Unicast;
  int count = 1;
  std::uint64_t seed = 1;
  int group_size = 2; // multicast group / anycast candidates
  ArrivalProcess process = BernoulliArrivals{0.1};
  std::vector<ClassVariant> variants{ClassVariant{}};

  bool operator==(const TrafficGenerator&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GraphSource graph;
  std::vector<TrafficClass> classes;
  std::vector<TrafficGenerator> generators;
  std::vector<PolicyMode> policies;
  Scheduler scheduler = Scheduler::Fifo;
  std::int64_t horizon = 1000;
  std::vector<std::uint64_t> seeds{1};
  KeyProcess keys = PoissonKeys{1.0, 20};
  std::int64_t queue_capacity = 10000;
  std::vector<double> sweep_rates; // per-class rate; empty runs the configured rates
  std::size_t stability_window = 20000;
  double slope_tol = 1e-3;
  std::string output_dir = "out";
  bool time_series = true;
  std::int64_t series_stride = 1;
  bool drift_diagnostics = false;
  int workers = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates. Errors are ConfigError naming the offending field
/// path, or the line and column for malformed JSON.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

/// Serializes every field, defaults included, so parse(serialize(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& c);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits. The output
/// directory and worker count are left out.
std::string config_hash(const ExperimentConfig& c);

nlohmann::json process_to_json(const ArrivalProcess& p);
nlohmann::json policy_to_json(const PolicyMode& m);
nlohmann::json keys_to_json(const KeyProcess& k);

/// Resolves the graph source; relative file paths are taken from base_dir.
NetworkGraph materialize_graph(const ExperimentConfig& c, const std::string& base_dir = ".");

/// Explicit classes followed by generated ones, ids renumbered 0..C-1.
std::vector<TrafficClass> materialize_classes(const NetworkGraph& g, const ExperimentConfig& c);

std::vector<std::string> preset_names();
/// Built-in experiment definitions. Throws ConfigError for unknown names.
ExperimentConfig preset_config(const std::string& name);

} // namespace qkd
