#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qkd/routing.hpp"
#include "qkd/topology.hpp"
#include "qkd/traffic.hpp"

namespace qkd {

struct TqdMode {
  bool key_storage = true;
  bool operator==(const TqdMode&) const = default;
};
/// Encrypts with fresh keys only and serves min(gamma, K) per slot.
struct SingleQueueMode {
  bool operator==(const SingleQueueMode&) const = default;
};
/// Per-commodity differential-backlog baseline with a capped key bank.
struct BackpressureMode {
  int key_cap = 50;
  bool operator==(const BackpressureMode&) const = default;
};
/// TQD with mixed security levels: classical classes skip encryption.
struct EtqdMode {
  bool key_storage = true;
  bool operator==(const EtqdMode&) const = default;
};

using PolicyMode = std::variant<TqdMode, SingleQueueMode, BackpressureMode, EtqdMode>;

/// Short stable label, e.g. "tqd-storage", "backpressure-50".
std::string policy_label(const PolicyMode& mode);

/// Precedence-relaxed counters per edge. key_residual is the key bank of
/// the virtual system: keys left after virtual encryption, so that
/// x_tilde[e] * key_residual[e] == 0 always holds.
struct VirtualQueues {
  std::vector<double> x_tilde;
  std::vector<double> y_tilde;
  std::vector<double> key_residual;

  explicit VirtualQueues(std::size_t edges = 0)
      : x_tilde(edges, 0.0), y_tilde(edges, 0.0), key_residual(edges, 0.0) {}
  std::size_t size() const { return x_tilde.size(); }
  double total() const;
};

/// W_e = x_tilde_e + y_tilde_e.
EdgeWeights assign_weights(const VirtualQueues& vq);
/// W_e = y_tilde_e, used for classes that skip encryption.
EdgeWeights assign_transmission_weights(const VirtualQueues& vq);

/// The class's min-weight route: path, spanning tree, Steiner tree or
/// anycast path according to its kind.
Route route_for_class(const NetworkGraph& g, const EdgeWeights& w, const TrafficClass& c,
                      const EdgeMask& allowed = {});

/// Routes every class with at least one arrival this slot.
std::map<int, Route> select_routes(const NetworkGraph& g, const EdgeWeights& w, const ArrivalBatch& arrivals,
                                   const std::vector<TrafficClass>& classes, const EdgeMask& allowed = {});

/// Quantum classes on the secured subgraph with W = x~ + y~; classical
/// classes on the full graph with W = y~.
std::map<int, Route> etqd_select_routes(const NetworkGraph& g, const VirtualQueues& vq,
                                        const ArrivalBatch& arrivals, const std::vector<TrafficClass>& classes);

/// A_e = sum over classes of arrivals(c) * [e in route(c)].
std::vector<std::int64_t> per_edge_arrivals(std::size_t edge_count, const std::map<int, Route>& routes,
                                            const ArrivalBatch& arrivals,
                                            const std::function<bool(int)>& include = {});

/// x~ <- (x~ + A - kappa)^+ and y~ <- (y~ + A - gamma)^+.
void virtual_update(VirtualQueues& vq, const std::vector<std::int64_t>& arrivals,
                    const std::vector<std::int64_t>& kappa, const std::vector<int>& gamma);

/// Same recursion with separate arrival counts for the encryption and the
/// transmission counters (classes that skip encryption only enter y~).
void virtual_update(VirtualQueues& vq, const std::vector<std::int64_t>& arrivals_x,
                    const std::vector<std::int64_t>& arrivals_y, const std::vector<std::int64_t>& kappa,
                    const std::vector<int>& gamma);

/// kappa_e for the virtual system: fresh keys plus the virtual residual
/// (with storage), or fresh keys alone.
std::vector<std::int64_t> virtual_kappa(const VirtualQueues& vq, const std::vector<int>& fresh, bool storage);

/// Advances the virtual key residual to (kappa - x~ - A)^+. Call before
/// virtual_update with the same slot's inputs.
void virtual_key_update(VirtualQueues& vq, const std::vector<std::int64_t>& arrivals_x,
                        const std::vector<std::int64_t>& kappa);

/// L = sum_e (x~_e^2 + y~_e^2).
double lyapunov(const VirtualQueues& vq);

/// B = m (2 A_max^2 + K_max^2 + gamma_max^2).
double drift_bound_B(int edge_count, double a_max, double k_max, double gamma_max);
double drift_bound_B(const NetworkGraph& g, double a_max, double k_max);

struct DriftDiagnostics {
  double lyapunov = 0.0;
  double drift = 0.0;
  double bound_B = 0.0;
};

/// Packets served on a single-queue link: min(gamma, fresh keys, backlog).
std::int64_t single_queue_policy_step(std::int64_t queue_length, int gamma, std::int64_t fresh_keys);

struct LinkActivation {
  EdgeId edge = 0;
  int commodity = 0; // class id
  std::int64_t count = 0;
};

/// Backlog of commodity c at node v; the destination's own backlog is 0.
using BacklogFn = std::function<std::int64_t(NodeId v, int commodity)>;

/// Each edge serves the commodity with the largest positive differential
/// backlog (ties to the lower class id), up to min(gamma_e, kappa_e).
/// Throws RoutingError for non-unicast classes.
std::vector<LinkActivation> backpressure_step(const NetworkGraph& g, const std::vector<TrafficClass>& classes,
                                              const BacklogFn& backlog, const std::vector<std::int64_t>& kappa);

} // namespace qkd
