#include "qkd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace qkd {

namespace {

class Dinic {
 public:
  explicit Dinic(int n) : adj_(static_cast<std::size_t>(n)), level_(adj_.size()), it_(adj_.size()) {}

  int add(int u, int v, double cap) {
    adj_[static_cast<std::size_t>(u)].push_back({v, static_cast<int>(adj_[static_cast<std::size_t>(v)].size()), cap});
    adj_[static_cast<std::size_t>(v)].push_back({u, static_cast<int>(adj_[static_cast<std::size_t>(u)].size()) - 1, 0.0});
    return static_cast<int>(adj_[static_cast<std::size_t>(u)].size()) - 1;
  }

  double run(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (true) {
        double f = dfs(s, t, std::numeric_limits<double>::infinity());
        if (f <= kEps) break;
        flow += f;
      }
    }
    return flow;
  }

  double residual(int u, int idx) const {
    return adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(idx)].cap;
  }

 private:
  static constexpr double kEps = 1e-12;
  struct E {
    int to;
    int rev;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const auto& e : adj_[static_cast<std::size_t>(u)]) {
        if (e.cap > kEps && level_[static_cast<std::size_t>(e.to)] < 0) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    auto& edges = adj_[static_cast<std::size_t>(u)];
    for (int& i = it_[static_cast<std::size_t>(u)]; i < static_cast<int>(edges.size()); ++i) {
      E& e = edges[static_cast<std::size_t>(i)];
      if (e.cap <= kEps || level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(u)] + 1) continue;
      double f = dfs(e.to, t, std::min(pushed, e.cap));
      if (f > kEps) {
        e.cap -= f;
        adj_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<E>> adj_;
  std::vector<int> level_;
  std::vector<int> it_;
};

} // namespace

double max_flow(int node_count, const std::vector<FlowArc>& arcs, int source, int sink,
                std::vector<double>* arc_flow) {
  if (source == sink) throw std::invalid_argument("max_flow: source equals sink");
  Dinic d(node_count);
  std::vector<int> handle;
  handle.reserve(arcs.size());
  for (const auto& a : arcs) handle.push_back(d.add(a.from, a.to, a.capacity));
  const double value = d.run(source, sink);
  if (arc_flow) {
    arc_flow->assign(arcs.size(), 0.0);
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      (*arc_flow)[i] = arcs[i].capacity - d.residual(arcs[i].from, handle[i]);
    }
  }
  return value;
}

CapacityVerdict unicast_capacity(const NetworkGraph& g, NodeId s, NodeId t) {
  if (s < 0 || s >= g.node_count() || t < 0 || t >= g.node_count()) {
    throw std::invalid_argument("unicast_capacity: node out of range");
  }
  if (s == t) throw std::invalid_argument("unicast_capacity: source equals destination");
  const auto omega = capacitated_transform(g);
  std::vector<FlowArc> arcs;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    arcs.push_back({g.edge(e).from, g.edge(e).to, omega[static_cast<std::size_t>(e)]});
  }
  CapacityVerdict v;
  v.method = "max-flow on omega = min(gamma, eta)";
  v.lambda_star = max_flow(g.node_count(), arcs, s, t, &v.edge_flow);
  return v;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

double least_squares_slope(std::span<const double> ys) {
  const auto n = static_cast<double>(ys.size());
  if (ys.size() < 2) return 0.0;
  const double x_mean = (n - 1.0) / 2.0;
  double y_mean = 0.0;
  for (double y : ys) y_mean += y;
  y_mean /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (ys[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

StabilityVerdict stability_test(std::span<const double> series, std::size_t window, double slope_tol,
                                std::optional<double> envelope) {
  if (window < 2) throw std::invalid_argument("stability_test: window must be >= 2");
  if (series.size() < 2 * window) throw std::invalid_argument("stability_test: series shorter than 2 x window");
  StabilityVerdict v;
  v.slope = least_squares_slope(series.subspan(series.size() - window));
  double sum = 0.0;
  for (double y : series) sum += y;
  v.time_average = sum / static_cast<double>(series.size());
  const bool bounded = !envelope || v.time_average <= *envelope;
  if (v.slope < slope_tol && bounded) v.verdict = Stability::Stable;
  else if (v.slope > 10.0 * slope_tol) v.verdict = Stability::Unstable;
  else v.verdict = Stability::Inconclusive;
  return v;
}

Estimate estimate(std::span<const double> xs) {
  Estimate e;
  e.samples = static_cast<int>(xs.size());
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    e.stderr_ = sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return e;
}

RunSummary summarize(std::span<const MetricsRecord> runs) {
  RunSummary s;
  if (runs.empty()) return s;
  s.policy = runs.front().policy;
  s.seeds = static_cast<int>(runs.size());
  const std::size_t nc = runs.front().classes.size();
  s.classes.resize(nc);

  std::vector<double> delays, residual, backlog;
  for (const auto& r : runs) {
    if (auto d = r.mean_delay()) delays.push_back(*d);
    residual.push_back(r.mean_residual_keys);
    backlog.push_back(r.mean_backlog);
    s.arrivals += r.arrivals;
    s.delivered += r.delivered;
    s.dropped += r.dropped;
    s.in_flight += r.in_flight;
    if (r.arrivals != r.delivered + r.in_flight + r.dropped) s.conserved = false;
  }
  if (!delays.empty()) s.mean_delay = estimate(delays);
  s.mean_residual_keys = estimate(residual);
  s.mean_backlog = estimate(backlog);

  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> cd, rate;
    auto& cs = s.classes[c];
    for (const auto& r : runs) {
      const auto& cm = r.classes.at(c);
      if (auto d = cm.mean_delay()) cd.push_back(*d);
      rate.push_back(r.delivered_rate(static_cast<int>(c)));
      cs.arrivals += cm.arrivals;
      cs.delivered += cm.delivered;
      cs.dropped += cm.dropped;
    }
    if (!cd.empty()) cs.mean_delay = estimate(cd);
    cs.delivered_rate = estimate(rate);
  }
  return s;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  using nlohmann::json;
  auto est = [](const Estimate& e) { return json{{"mean", e.mean}, {"stderr", e.stderr_}, {"samples", e.samples}}; };
  auto opt = [&](const std::optional<Estimate>& e) -> json { return e ? est(*e) : json(nullptr); };
  json classes = json::array();
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const auto& cs = s.classes[c];
    classes.push_back({{"class", c},
                       {"mean_delay", opt(cs.mean_delay)},
                       {"delivered_rate", est(cs.delivered_rate)},
                       {"arrivals", cs.arrivals},
                       {"delivered", cs.delivered},
                       {"dropped", cs.dropped}});
  }
  return {{"policy", s.policy},
          {"seeds", s.seeds},
          {"mean_delay", opt(s.mean_delay)},
          {"mean_residual_keys", est(s.mean_residual_keys)},
          {"mean_backlog", est(s.mean_backlog)},
          {"arrivals", s.arrivals},
          {"delivered", s.delivered},
          {"dropped", s.dropped},
          {"in_flight", s.in_flight},
          {"conserved", s.conserved},
          {"classes", classes}};
}

} // namespace qkd
