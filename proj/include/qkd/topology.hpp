#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qkd {

using NodeId = int;
using EdgeId = int;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One link as supplied by the user. Undirected specs expand to two
/// mirrored directed edges.
struct EdgeSpec {
  NodeId from = 0;
  NodeId to = 0;
  int gamma = 1;       // classical capacity, packets per slot
  double eta = 1.0;    // mean keys per slot
  bool has_qkd = true; // member of the QKD-secured edge set
  bool directed = false;

  bool operator==(const EdgeSpec&) const = default;
};

/// A directed edge of the internal graph.
struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  int gamma = 1;
  double eta = 1.0;
  bool has_qkd = true;
  int link = 0;        // index of the originating EdgeSpec
  EdgeId reverse = -1; // mirrored edge for undirected links, else -1
};

/// Immutable network model. Edge ids are positions in edges(), assigned in
/// spec order; an undirected spec yields two consecutive ids, forward first.
class NetworkGraph {
 public:
  NetworkGraph() = default;

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<EdgeSpec>& specs() const { return specs_; }

  /// Outgoing edge ids of a node, in ascending id order.
  std::span<const EdgeId> out_edges(NodeId v) const { return out_[static_cast<std::size_t>(v)]; }
  std::span<const EdgeId> in_edges(NodeId v) const { return in_[static_cast<std::size_t>(v)]; }

  int max_gamma() const;
  bool is_connected() const; // weak connectivity over all edges

  friend NetworkGraph build_graph(int n, const std::vector<EdgeSpec>& specs);

 private:
  int n_ = 0;
  std::vector<EdgeSpec> specs_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
};

/// Validates the specs and builds adjacency. Throws GraphError on an
/// out-of-range endpoint, a self-loop, a duplicate link, gamma < 1, or a
/// QKD link with non-positive eta.
NetworkGraph build_graph(int n, const std::vector<EdgeSpec>& specs);

/// G(n, p) over unordered pairs, scanned in (i, j) lexicographic order.
/// eta is drawn uniformly from [eta_min, eta_max]; every edge carries QKD.
NetworkGraph erdos_renyi(int n, double p, int gamma, double eta_min, double eta_max,
                         std::uint64_t seed);

/// Per-edge capacity of the transformed graph: omega_e = min(gamma_e, eta_e).
/// Edges without QKD get omega = 0 since they cannot carry secured traffic.
std::vector<double> capacitated_transform(const NetworkGraph& g);

/// Graph restricted to the QKD-secured edges. Edge ids are preserved by
/// returning a mask rather than a new graph.
std::vector<bool> secured_edge_mask(const NetworkGraph& g);

nlohmann::json graph_to_json(const NetworkGraph& g);
NetworkGraph graph_from_json(const nlohmann::json& j);
NetworkGraph load_graph_file(const std::string& path);

} // namespace qkd
