#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/topology.hpp"

namespace qkd {

/// W_e per edge id; finite and non-negative.
using EdgeWeights = std::vector<double>;

/// Edges a route may use. Empty means every edge is allowed.
using EdgeMask = std::vector<bool>;

class RoutingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RouteKind { Path, Tree };

/// A path or a rooted out-tree. Edges are stored parent-before-child; a
/// path is the special case where every position has at most one child.
/// Positions index into `edges`.
struct Route {
  RouteKind kind = RouteKind::Path;
  NodeId root = 0;
  std::vector<EdgeId> edges;
  std::vector<int> parent;                // parent position, -1 at the root
  std::vector<std::vector<int>> children; // child positions per position
  std::vector<int> first;                 // positions of edges leaving the root
  std::vector<bool> head_is_terminal;     // per position
  std::vector<NodeId> terminals;          // sorted

  double weight(const EdgeWeights& w) const;
  bool contains(EdgeId e) const;
  /// Node sequence of a path route, root first.
  std::vector<NodeId> nodes(const NetworkGraph& g) const;
};

/// Assembles a Route from an unordered edge set forming an out-tree at
/// `root`. Throws RoutingError when the set is not such a tree.
Route make_route(const NetworkGraph& g, RouteKind kind, NodeId root, const std::vector<EdgeId>& edge_set,
                 std::vector<NodeId> terminals);

/// Structural check: a path is a simple root-to-terminal walk; a tree is an
/// acyclic out-tree at root covering every terminal. Returns a diagnostic on
/// failure.
std::optional<std::string> validate_route(const NetworkGraph& g, const Route& r);

/// Single-source labels ordered by (weight, hops, lexicographic node
/// sequence). pred_edge is -1 for the source and unreached nodes.
struct ShortestPathTree {
  NodeId source = 0;
  std::vector<double> dist;
  std::vector<int> hops;
  std::vector<EdgeId> pred_edge;
  bool reached(NodeId v) const { return v == source || pred_edge[static_cast<std::size_t>(v)] >= 0; }
  std::vector<NodeId> node_sequence(const NetworkGraph& g, NodeId v) const;
  std::vector<EdgeId> edge_sequence(const NetworkGraph& g, NodeId v) const;
};

ShortestPathTree shortest_paths(const NetworkGraph& g, const EdgeWeights& w, NodeId source,
                                const EdgeMask& allowed = {});

/// Min-weight s-t path. Ties go to fewer hops, then the lexicographically
/// smallest node sequence.
Route min_weight_path(const NetworkGraph& g, const EdgeWeights& w, NodeId s, NodeId t,
                      const EdgeMask& allowed = {});

/// Minimum-weight spanning out-tree rooted at `root` (Chu-Liu/Edmonds, so
/// asymmetric per-direction weights are handled exactly). Ties between
/// equal-weight incoming edges go to the lower edge id.
Route min_weight_spanning_tree(const NetworkGraph& g, const EdgeWeights& w, NodeId root,
                               const EdgeMask& allowed = {});

/// Steiner out-tree via the metric-closure construction: shortest-path
/// closure over root and terminals, minimum arborescence on the closure,
/// expansion back to graph edges, re-spanning, and pruning of non-terminal
/// leaves. Within 2x of optimal for symmetric weights.
Route steiner_tree_approx(const NetworkGraph& g, const EdgeWeights& w, NodeId root,
                          const std::vector<NodeId>& terminals, const EdgeMask& allowed = {});

/// Cheapest of the per-candidate min-weight paths, ordered like
/// min_weight_path.
Route anycast_route(const NetworkGraph& g, const EdgeWeights& w, NodeId s,
                    const std::vector<NodeId>& candidates, const EdgeMask& allowed = {});

/// One arc of a general digraph for min_arborescence; `key` breaks ties.
struct Arc {
  int from = 0;
  int to = 0;
  double weight = 0.0;
  int key = 0;
};

/// Chu-Liu/Edmonds. Returns the chosen arc indices (one per non-root node),
/// or nullopt when some node is unreachable from root.
std::optional<std::vector<int>> min_arborescence(int node_count, const std::vector<Arc>& arcs, int root);

} // namespace qkd
