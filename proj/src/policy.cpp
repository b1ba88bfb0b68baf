#include "qkd/policy.hpp"

#include <algorithm>
#include <numeric>

namespace qkd {

std::string policy_label(const PolicyMode& mode) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TqdMode>) return m.key_storage ? "tqd-storage" : "tqd-nostorage";
        else if constexpr (std::is_same_v<T, SingleQueueMode>) return "single-queue";
        else if constexpr (std::is_same_v<T, BackpressureMode>) return "backpressure-" + std::to_string(m.key_cap);
        else return m.key_storage ? "etqd-storage" : "etqd-nostorage";
      },
      mode);
}

double VirtualQueues::total() const {
  return std::accumulate(x_tilde.begin(), x_tilde.end(), 0.0) + std::accumulate(y_tilde.begin(), y_tilde.end(), 0.0);
}

EdgeWeights assign_weights(const VirtualQueues& vq) {
  EdgeWeights w(vq.size());
  for (std::size_t e = 0; e < vq.size(); ++e) w[e] = vq.x_tilde[e] + vq.y_tilde[e];
  return w;
}

EdgeWeights assign_transmission_weights(const VirtualQueues& vq) {
  return vq.y_tilde;
}

Route route_for_class(const NetworkGraph& g, const EdgeWeights& w, const TrafficClass& c, const EdgeMask& allowed) {
  switch (c.kind) {
    case TrafficKind::Unicast: return min_weight_path(g, w, c.source, c.destinations.front(), allowed);
    case TrafficKind::Broadcast: return min_weight_spanning_tree(g, w, c.source, allowed);
    case TrafficKind::Multicast:
      if (c.destinations.size() == 1) {
        auto r = min_weight_path(g, w, c.source, c.destinations.front(), allowed);
        return make_route(g, RouteKind::Tree, r.root, r.edges, r.terminals);
      }
      return steiner_tree_approx(g, w, c.source, c.destinations, allowed);
    case TrafficKind::Anycast: return anycast_route(g, w, c.source, c.destinations, allowed);
  }
  throw RoutingError("unknown traffic kind");
}

std::map<int, Route> select_routes(const NetworkGraph& g, const EdgeWeights& w, const ArrivalBatch& arrivals,
                                   const std::vector<TrafficClass>& classes, const EdgeMask& allowed) {
  std::map<int, Route> routes;
  for (const auto& c : classes) {
    if (arrivals.counts[static_cast<std::size_t>(c.id)] > 0) routes.emplace(c.id, route_for_class(g, w, c, allowed));
  }
  return routes;
}

std::map<int, Route> etqd_select_routes(const NetworkGraph& g, const VirtualQueues& vq, const ArrivalBatch& arrivals,
                                        const std::vector<TrafficClass>& classes) {
  const EdgeMask secured = secured_edge_mask(g);
  const EdgeWeights full = assign_weights(vq);
  const EdgeWeights transmit = assign_transmission_weights(vq);
  std::map<int, Route> routes;
  for (const auto& c : classes) {
    if (arrivals.counts[static_cast<std::size_t>(c.id)] == 0) continue;
    if (c.security == Security::Quantum) {
      routes.emplace(c.id, route_for_class(g, full, c, secured));
    } else {
      routes.emplace(c.id, route_for_class(g, transmit, c));
    }
  }
  return routes;
}

std::vector<std::int64_t> per_edge_arrivals(std::size_t edge_count, const std::map<int, Route>& routes,
                                            const ArrivalBatch& arrivals, const std::function<bool(int)>& include) {
  std::vector<std::int64_t> a(edge_count, 0);
  for (const auto& [cls, route] : routes) {
    if (include && !include(cls)) continue;
    const auto count = arrivals.counts[static_cast<std::size_t>(cls)];
    for (EdgeId e : route.edges) a[static_cast<std::size_t>(e)] += count;
  }
  return a;
}

void virtual_update(VirtualQueues& vq, const std::vector<std::int64_t>& arrivals,
                    const std::vector<std::int64_t>& kappa, const std::vector<int>& gamma) {
  virtual_update(vq, arrivals, arrivals, kappa, gamma);
}

void virtual_update(VirtualQueues& vq, const std::vector<std::int64_t>& arrivals_x,
                    const std::vector<std::int64_t>& arrivals_y, const std::vector<std::int64_t>& kappa,
                    const std::vector<int>& gamma) {
  for (std::size_t e = 0; e < vq.size(); ++e) {
    vq.x_tilde[e] = std::max(0.0, vq.x_tilde[e] + static_cast<double>(arrivals_x[e]) - static_cast<double>(kappa[e]));
    vq.y_tilde[e] = std::max(0.0, vq.y_tilde[e] + static_cast<double>(arrivals_y[e]) - static_cast<double>(gamma[e]));
  }
}

std::vector<std::int64_t> virtual_kappa(const VirtualQueues& vq, const std::vector<int>& fresh, bool storage) {
  std::vector<std::int64_t> kappa(vq.size());
  for (std::size_t e = 0; e < vq.size(); ++e) {
    kappa[e] = fresh[e] + (storage ? static_cast<std::int64_t>(vq.key_residual[e]) : 0);
  }
  return kappa;
}

void virtual_key_update(VirtualQueues& vq, const std::vector<std::int64_t>& arrivals_x,
                        const std::vector<std::int64_t>& kappa) {
  for (std::size_t e = 0; e < vq.size(); ++e) {
    vq.key_residual[e] =
        std::max(0.0, static_cast<double>(kappa[e]) - vq.x_tilde[e] - static_cast<double>(arrivals_x[e]));
  }
}

double lyapunov(const VirtualQueues& vq) {
  double l = 0.0;
  for (std::size_t e = 0; e < vq.size(); ++e) l += vq.x_tilde[e] * vq.x_tilde[e] + vq.y_tilde[e] * vq.y_tilde[e];
  return l;
}

double drift_bound_B(int edge_count, double a_max, double k_max, double gamma_max) {
  return static_cast<double>(edge_count) * (2.0 * a_max * a_max + k_max * k_max + gamma_max * gamma_max);
}

double drift_bound_B(const NetworkGraph& g, double a_max, double k_max) {
  return drift_bound_B(g.edge_count(), a_max, k_max, static_cast<double>(g.max_gamma()));
}

std::int64_t single_queue_policy_step(std::int64_t queue_length, int gamma, std::int64_t fresh_keys) {
  return std::max<std::int64_t>(0, std::min({queue_length, static_cast<std::int64_t>(gamma), fresh_keys}));
}

std::vector<LinkActivation> backpressure_step(const NetworkGraph& g, const std::vector<TrafficClass>& classes,
                                              const BacklogFn& backlog, const std::vector<std::int64_t>& kappa) {
  for (const auto& c : classes) {
    if (c.kind != TrafficKind::Unicast) {
      throw RoutingError("backpressure supports unicast classes only (class " + std::to_string(c.id) + " is " +
                         to_string(c.kind) + ")");
    }
  }
  std::vector<LinkActivation> out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (!ed.has_qkd) continue;
    const std::int64_t budget = std::min<std::int64_t>(ed.gamma, kappa[static_cast<std::size_t>(e)]);
    if (budget <= 0) continue;
    int best = -1;
    std::int64_t best_diff = 0;
    for (const auto& c : classes) {
      const NodeId dest = c.destinations.front();
      if (ed.from == dest) continue;
      const std::int64_t here = backlog(ed.from, c.id);
      const std::int64_t there = ed.to == dest ? 0 : backlog(ed.to, c.id);
      const std::int64_t diff = here - there;
      if (diff > best_diff) {
        best = c.id;
        best_diff = diff;
      }
    }
    if (best >= 0) out.push_back({e, best, budget});
  }
  return out;
}

} // namespace qkd
