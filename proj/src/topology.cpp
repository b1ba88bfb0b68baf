#include "qkd/topology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <utility>

#include "qkd/random.hpp"

namespace qkd {

int NetworkGraph::max_gamma() const {
  int best = 0;
  for (const auto& e : edges_) best = std::max(best, e.gamma);
  return best;
}

bool NetworkGraph::is_connected() const {
  if (n_ <= 1) return true;
  std::vector<bool> seen(static_cast<std::size_t>(n_), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    auto visit = [&](NodeId w) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        ++count;
        stack.push_back(w);
      }
    };
    for (EdgeId e : out_edges(v)) visit(edges_[static_cast<std::size_t>(e)].to);
    for (EdgeId e : in_edges(v)) visit(edges_[static_cast<std::size_t>(e)].from);
  }
  return count == n_;
}

NetworkGraph build_graph(int n, const std::vector<EdgeSpec>& specs) {
  if (n < 0) throw GraphError("node count must be non-negative");
  NetworkGraph g;
  g.n_ = n;
  g.specs_ = specs;
  g.out_.assign(static_cast<std::size_t>(n), {});
  g.in_.assign(static_cast<std::size_t>(n), {});

  std::set<std::pair<NodeId, NodeId>> directed_seen;
  auto claim = [&](NodeId a, NodeId b) {
    if (!directed_seen.insert({a, b}).second) {
      throw GraphError("duplicate edge " + std::to_string(a) + "->" + std::to_string(b));
    }
  };

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const EdgeSpec& s = specs[i];
    auto where = " (edge " + std::to_string(i) + ")";
    if (s.from < 0 || s.from >= n || s.to < 0 || s.to >= n) {
      throw GraphError("endpoint out of range" + where);
    }
    if (s.from == s.to) throw GraphError("self-loop at node " + std::to_string(s.from) + where);
    if (s.gamma < 1) throw GraphError("gamma must be >= 1" + where);
    if (s.has_qkd && !(s.eta > 0.0)) throw GraphError("eta must be > 0 on a QKD link" + where);
    if (s.eta < 0.0) throw GraphError("eta must be non-negative" + where);

    claim(s.from, s.to);
    Edge fwd{s.from, s.to, s.gamma, s.eta, s.has_qkd, static_cast<int>(i), -1};
    EdgeId fwd_id = static_cast<EdgeId>(g.edges_.size());
    g.edges_.push_back(fwd);
    if (!s.directed) {
      claim(s.to, s.from);
      Edge rev{s.to, s.from, s.gamma, s.eta, s.has_qkd, static_cast<int>(i), fwd_id};
      g.edges_.push_back(rev);
      g.edges_[static_cast<std::size_t>(fwd_id)].reverse = fwd_id + 1;
    }
  }
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    g.out_[static_cast<std::size_t>(g.edges_[e].from)].push_back(static_cast<EdgeId>(e));
    g.in_[static_cast<std::size_t>(g.edges_[e].to)].push_back(static_cast<EdgeId>(e));
  }
  return g;
}

NetworkGraph erdos_renyi(int n, double p, int gamma, double eta_min, double eta_max,
                         std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw GraphError("erdos_renyi: p must lie in (0, 1]");
  if (!(eta_min > 0.0) || eta_max < eta_min) {
    throw GraphError("erdos_renyi: eta range must satisfy 0 < eta_min <= eta_max");
  }
  Rng rng(seed);
  std::vector<EdgeSpec> specs;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      // Both draws happen for every pair so the eta sequence does not
      // depend on p.
      bool connect = uniform01(rng) < p;
      double eta = eta_min + (eta_max - eta_min) * uniform01(rng);
      if (connect) specs.push_back(EdgeSpec{i, j, gamma, eta, true, false});
    }
  }
  return build_graph(n, specs);
}

std::vector<double> capacitated_transform(const NetworkGraph& g) {
  std::vector<double> omega;
  omega.reserve(g.edges().size());
  for (const auto& e : g.edges()) {
    omega.push_back(e.has_qkd ? std::min(static_cast<double>(e.gamma), e.eta) : 0.0);
  }
  return omega;
}

std::vector<bool> secured_edge_mask(const NetworkGraph& g) {
  std::vector<bool> mask;
  mask.reserve(g.edges().size());
  for (const auto& e : g.edges()) mask.push_back(e.has_qkd);
  return mask;
}

nlohmann::json graph_to_json(const NetworkGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& s : g.specs()) {
    edges.push_back({{"from", s.from},
                     {"to", s.to},
                     {"gamma", s.gamma},
                     {"eta", s.eta},
                     {"has_qkd", s.has_qkd},
                     {"directed", s.directed}});
  }
  return {{"nodes", g.node_count()}, {"edges", edges}};
}

NetworkGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes")) throw GraphError("graph: missing required field 'nodes'");
  if (!j.contains("edges")) throw GraphError("graph: missing required field 'edges'");
  std::vector<EdgeSpec> specs;
  std::size_t idx = 0;
  for (const auto& je : j.at("edges")) {
    auto field = [&](const char* name) -> const nlohmann::json& {
      if (!je.contains(name)) {
        throw GraphError("graph.edges[" + std::to_string(idx) + "]: missing required field '" +
                         name + "'");
      }
      return je.at(name);
    };
    EdgeSpec s;
    s.from = field("from").get<int>();
    s.to = field("to").get<int>();
    s.gamma = je.value("gamma", 1);
    s.eta = field("eta").get<double>();
    s.has_qkd = je.value("has_qkd", true);
    s.directed = je.value("directed", false);
    specs.push_back(s);
    ++idx;
  }
  return build_graph(j.at("nodes").get<int>(), specs);
}

NetworkGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw GraphError("graph file " + path + ": " + err.what());
  }
  return graph_from_json(j);
}

} // namespace qkd
