#include "qkd/routing.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

namespace qkd {

namespace {

bool edge_allowed(const EdgeMask& allowed, EdgeId e) {
  return allowed.empty() || allowed[static_cast<std::size_t>(e)];
}

void check_weights(const NetworkGraph& g, const EdgeWeights& w) {
  if (w.size() != static_cast<std::size_t>(g.edge_count())) {
    throw RoutingError("weight vector size does not match edge count");
  }
}

void check_node(const NetworkGraph& g, NodeId v, const char* what) {
  if (v < 0 || v >= g.node_count()) throw RoutingError(std::string(what) + " out of range");
}

} // namespace

double Route::weight(const EdgeWeights& w) const {
  double total = 0.0;
  for (EdgeId e : edges) total += w[static_cast<std::size_t>(e)];
  return total;
}

bool Route::contains(EdgeId e) const {
  return std::find(edges.begin(), edges.end(), e) != edges.end();
}

std::vector<NodeId> Route::nodes(const NetworkGraph& g) const {
  std::vector<NodeId> out{root};
  for (EdgeId e : edges) out.push_back(g.edge(e).to);
  return out;
}

Route make_route(const NetworkGraph& g, RouteKind kind, NodeId root, const std::vector<EdgeId>& edge_set,
                 std::vector<NodeId> terminals) {
  std::sort(terminals.begin(), terminals.end());
  Route r;
  r.kind = kind;
  r.root = root;
  r.terminals = terminals;

  std::vector<std::vector<EdgeId>> out(static_cast<std::size_t>(g.node_count()));
  std::vector<int> indegree(static_cast<std::size_t>(g.node_count()), 0);
  for (EdgeId e : edge_set) {
    const Edge& ed = g.edge(e);
    out[static_cast<std::size_t>(ed.from)].push_back(e);
    if (++indegree[static_cast<std::size_t>(ed.to)] > 1) {
      throw RoutingError("edge set is not an out-tree: node " + std::to_string(ed.to) +
                         " has two parents");
    }
  }
  if (indegree[static_cast<std::size_t>(root)] != 0) throw RoutingError("edge set enters the root");
  for (auto& lst : out) std::sort(lst.begin(), lst.end());

  // BFS from the root; position order is parent-before-child.
  std::queue<std::pair<NodeId, int>> frontier;
  frontier.push({root, -1});
  while (!frontier.empty()) {
    auto [v, parent_pos] = frontier.front();
    frontier.pop();
    for (EdgeId e : out[static_cast<std::size_t>(v)]) {
      int pos = static_cast<int>(r.edges.size());
      r.edges.push_back(e);
      r.parent.push_back(parent_pos);
      r.children.emplace_back();
      NodeId head = g.edge(e).to;
      r.head_is_terminal.push_back(std::binary_search(terminals.begin(), terminals.end(), head));
      if (parent_pos < 0) r.first.push_back(pos);
      else r.children[static_cast<std::size_t>(parent_pos)].push_back(pos);
      frontier.push({head, pos});
    }
  }
  if (r.edges.size() != edge_set.size()) throw RoutingError("edge set is not connected to the root");
  return r;
}

std::optional<std::string> validate_route(const NetworkGraph& g, const Route& r) {
  const std::size_t k = r.edges.size();
  if (r.parent.size() != k || r.children.size() != k || r.head_is_terminal.size() != k) {
    return "inconsistent route arrays";
  }
  std::vector<int> seen(static_cast<std::size_t>(g.node_count()), 0);
  seen[static_cast<std::size_t>(r.root)] = 1;
  for (std::size_t i = 0; i < k; ++i) {
    EdgeId e = r.edges[i];
    if (e < 0 || e >= g.edge_count()) return "edge id out of range";
    const Edge& ed = g.edge(e);
    int p = r.parent[i];
    if (p >= static_cast<int>(i)) return "parent listed after child";
    NodeId tail = p < 0 ? r.root : g.edge(r.edges[static_cast<std::size_t>(p)]).to;
    if (ed.from != tail) return "edge does not continue from its parent";
    if (seen[static_cast<std::size_t>(ed.to)]++) return "node visited twice (cycle or repeated node)";
  }
  for (NodeId t : r.terminals) {
    if (!seen[static_cast<std::size_t>(t)]) return "terminal " + std::to_string(t) + " not covered";
  }
  if (r.kind == RouteKind::Path) {
    if (r.terminals.size() != 1) return "path must have one terminal";
    for (std::size_t i = 0; i < k; ++i) {
      if (r.parent[i] != static_cast<int>(i) - 1) return "path edges out of order";
    }
    if (k == 0 || g.edge(r.edges.back()).to != r.terminals.front()) return "path does not end at terminal";
  } else {
    // Every leaf of the tree must be useful, i.e. a terminal.
    for (std::size_t i = 0; i < k; ++i) {
      if (r.children[i].empty() && !r.head_is_terminal[i]) return "non-terminal leaf";
    }
  }
  return std::nullopt;
}

std::vector<NodeId> ShortestPathTree::node_sequence(const NetworkGraph& g, NodeId v) const {
  std::vector<NodeId> seq{v};
  while (v != source) {
    EdgeId e = pred_edge[static_cast<std::size_t>(v)];
    if (e < 0) return {};
    v = g.edge(e).from;
    seq.push_back(v);
  }
  std::reverse(seq.begin(), seq.end());
  return seq;
}

std::vector<EdgeId> ShortestPathTree::edge_sequence(const NetworkGraph& g, NodeId v) const {
  std::vector<EdgeId> seq;
  while (v != source) {
    EdgeId e = pred_edge[static_cast<std::size_t>(v)];
    if (e < 0) return {};
    seq.push_back(e);
    v = g.edge(e).from;
  }
  std::reverse(seq.begin(), seq.end());
  return seq;
}

ShortestPathTree shortest_paths(const NetworkGraph& g, const EdgeWeights& w, NodeId source,
                                const EdgeMask& allowed) {
  check_weights(g, w);
  check_node(g, source, "source");
  const auto n = static_cast<std::size_t>(g.node_count());
  ShortestPathTree t;
  t.source = source;
  t.dist.assign(n, std::numeric_limits<double>::infinity());
  t.hops.assign(n, std::numeric_limits<int>::max());
  t.pred_edge.assign(n, -1);
  std::vector<bool> done(n, false);
  t.dist[static_cast<std::size_t>(source)] = 0.0;
  t.hops[static_cast<std::size_t>(source)] = 0;

  // Equal (dist, hops) labels are resolved by comparing the node sequences
  // of the two predecessors, which have equal length.
  auto seq_less = [&](NodeId a, NodeId b) {
    if (a == b) return false;
    return t.node_sequence(g, a) < t.node_sequence(g, b);
  };

  using Key = std::tuple<double, int, NodeId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> pq;
  pq.push({0.0, 0, source});
  while (!pq.empty()) {
    auto [d, h, u] = pq.top();
    pq.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (done[ui]) continue;
    done[ui] = true;
    for (EdgeId e : g.out_edges(u)) {
      if (!edge_allowed(allowed, e)) continue;
      const NodeId v = g.edge(e).to;
      const auto vi = static_cast<std::size_t>(v);
      if (done[vi]) continue;
      const double nd = d + w[static_cast<std::size_t>(e)];
      const int nh = h + 1;
      bool better = false;
      if (nd < t.dist[vi] || (nd == t.dist[vi] && nh < t.hops[vi])) {
        better = true;
      } else if (nd == t.dist[vi] && nh == t.hops[vi]) {
        better = seq_less(u, g.edge(t.pred_edge[vi]).from);
      }
      if (!better) continue;
      const bool key_changed = nd != t.dist[vi] || nh != t.hops[vi];
      t.dist[vi] = nd;
      t.hops[vi] = nh;
      t.pred_edge[vi] = e;
      if (key_changed) pq.push({nd, nh, v});
    }
  }
  return t;
}

Route min_weight_path(const NetworkGraph& g, const EdgeWeights& w, NodeId s, NodeId t,
                      const EdgeMask& allowed) {
  check_node(g, s, "source");
  check_node(g, t, "destination");
  if (s == t) throw RoutingError("min_weight_path: source equals destination");
  auto tree = shortest_paths(g, w, s, allowed);
  if (!tree.reached(t)) {
    throw RoutingError("destination " + std::to_string(t) + " unreachable from " + std::to_string(s));
  }
  return make_route(g, RouteKind::Path, s, tree.edge_sequence(g, t), {t});
}

Route anycast_route(const NetworkGraph& g, const EdgeWeights& w, NodeId s,
                    const std::vector<NodeId>& candidates, const EdgeMask& allowed) {
  if (candidates.empty()) throw RoutingError("anycast: empty candidate set");
  auto tree = shortest_paths(g, w, s, allowed);
  NodeId best = -1;
  std::vector<NodeId> best_seq;
  for (NodeId c : candidates) {
    check_node(g, c, "candidate");
    if (c == s || !tree.reached(c)) continue;
    const auto ci = static_cast<std::size_t>(c);
    if (best >= 0) {
      const auto bi = static_cast<std::size_t>(best);
      if (tree.dist[ci] > tree.dist[bi]) continue;
      if (tree.dist[ci] == tree.dist[bi]) {
        if (tree.hops[ci] > tree.hops[bi]) continue;
        if (tree.hops[ci] == tree.hops[bi]) {
          auto seq = tree.node_sequence(g, c);
          if (!(seq < best_seq)) continue;
        }
      }
    }
    best = c;
    best_seq = tree.node_sequence(g, c);
  }
  if (best < 0) throw RoutingError("anycast: no reachable candidate from " + std::to_string(s));
  return make_route(g, RouteKind::Path, s, tree.edge_sequence(g, best), {best});
}

std::optional<std::vector<int>> min_arborescence(int node_count, const std::vector<Arc>& arcs, int root) {
  const auto n = static_cast<std::size_t>(node_count);
  auto lighter = [&](int a, int b) {
    const Arc& x = arcs[static_cast<std::size_t>(a)];
    const Arc& y = arcs[static_cast<std::size_t>(b)];
    return x.weight < y.weight || (x.weight == y.weight && x.key < y.key);
  };
  std::vector<int> best_in(n, -1);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const Arc& a = arcs[i];
    if (a.to == root || a.from == a.to) continue;
    int& slot = best_in[static_cast<std::size_t>(a.to)];
    if (slot < 0 || lighter(static_cast<int>(i), slot)) slot = static_cast<int>(i);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<int>(v) != root && best_in[v] < 0) return std::nullopt;
  }

  // Find cycles among the chosen incoming arcs.
  std::vector<int> comp(n, -1);
  std::vector<int> visit(n, -1);
  std::vector<bool> on_cycle(n, false);
  int comps = 0;
  for (std::size_t v = 0; v < n; ++v) {
    int x = static_cast<int>(v);
    while (x != root && visit[static_cast<std::size_t>(x)] < 0) {
      visit[static_cast<std::size_t>(x)] = static_cast<int>(v);
      x = arcs[static_cast<std::size_t>(best_in[static_cast<std::size_t>(x)])].from;
    }
    if (x != root && visit[static_cast<std::size_t>(x)] == static_cast<int>(v) &&
        comp[static_cast<std::size_t>(x)] < 0) {
      int y = x;
      do {
        comp[static_cast<std::size_t>(y)] = comps;
        on_cycle[static_cast<std::size_t>(y)] = true;
        y = arcs[static_cast<std::size_t>(best_in[static_cast<std::size_t>(y)])].from;
      } while (y != x);
      ++comps;
    }
  }
  if (comps == 0) {
    std::vector<int> out;
    for (std::size_t v = 0; v < n; ++v) {
      if (static_cast<int>(v) != root) out.push_back(best_in[v]);
    }
    return out;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (comp[v] < 0) comp[v] = comps++;
  }

  std::vector<Arc> contracted;
  std::vector<int> origin;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const Arc& a = arcs[i];
    const int cu = comp[static_cast<std::size_t>(a.from)];
    const int cv = comp[static_cast<std::size_t>(a.to)];
    if (cu == cv) continue;
    double wgt = a.weight;
    if (on_cycle[static_cast<std::size_t>(a.to)]) {
      wgt -= arcs[static_cast<std::size_t>(best_in[static_cast<std::size_t>(a.to)])].weight;
    }
    contracted.push_back({cu, cv, wgt, a.key});
    origin.push_back(static_cast<int>(i));
  }
  auto sub = min_arborescence(comps, contracted, comp[static_cast<std::size_t>(root)]);
  if (!sub) return std::nullopt;

  std::vector<int> out;
  std::vector<bool> entry(n, false);
  for (int ci : *sub) {
    int i = origin[static_cast<std::size_t>(ci)];
    out.push_back(i);
    NodeId head = arcs[static_cast<std::size_t>(i)].to;
    if (on_cycle[static_cast<std::size_t>(head)]) entry[static_cast<std::size_t>(head)] = true;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (on_cycle[v] && !entry[v]) out.push_back(best_in[v]);
  }
  return out;
}

Route min_weight_spanning_tree(const NetworkGraph& g, const EdgeWeights& w, NodeId root,
                               const EdgeMask& allowed) {
  check_weights(g, w);
  check_node(g, root, "root");
  std::vector<Arc> arcs;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!edge_allowed(allowed, e)) continue;
    const Edge& ed = g.edge(e);
    arcs.push_back({ed.from, ed.to, w[static_cast<std::size_t>(e)], e});
  }
  auto chosen = min_arborescence(g.node_count(), arcs, root);
  if (!chosen) throw RoutingError("spanning tree: graph not connected from root " + std::to_string(root));
  std::vector<EdgeId> edges;
  for (int i : *chosen) edges.push_back(arcs[static_cast<std::size_t>(i)].key);
  std::vector<NodeId> terminals;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (v != root) terminals.push_back(v);
  }
  return make_route(g, RouteKind::Tree, root, edges, terminals);
}

Route steiner_tree_approx(const NetworkGraph& g, const EdgeWeights& w, NodeId root,
                          const std::vector<NodeId>& terminals_in, const EdgeMask& allowed) {
  check_weights(g, w);
  check_node(g, root, "root");
  std::vector<NodeId> terminals = terminals_in;
  std::sort(terminals.begin(), terminals.end());
  terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
  std::erase(terminals, root);
  if (terminals.empty()) throw RoutingError("steiner: no terminals besides the root");
  if (static_cast<int>(terminals.size()) == g.node_count() - 1) {
    return min_weight_spanning_tree(g, w, root, allowed);
  }

  // Metric closure over key nodes (root first).
  std::vector<NodeId> keys{root};
  keys.insert(keys.end(), terminals.begin(), terminals.end());
  std::vector<ShortestPathTree> trees;
  trees.reserve(keys.size());
  for (NodeId k : keys) trees.push_back(shortest_paths(g, w, k, allowed));
  for (NodeId t : terminals) {
    if (!trees.front().reached(t)) {
      throw RoutingError("steiner: terminal " + std::to_string(t) + " unreachable from root");
    }
  }
  std::vector<Arc> closure;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = 1; j < keys.size(); ++j) {
      if (i == j || !trees[i].reached(keys[j])) continue;
      closure.push_back({static_cast<int>(i), static_cast<int>(j),
                         trees[i].dist[static_cast<std::size_t>(keys[j])],
                         static_cast<int>(i * keys.size() + j)});
    }
  }
  auto picked = min_arborescence(static_cast<int>(keys.size()), closure, 0);
  if (!picked) throw RoutingError("steiner: closure not rooted-connected");

  std::vector<bool> in_union(static_cast<std::size_t>(g.edge_count()), false);
  for (int ci : *picked) {
    const Arc& a = closure[static_cast<std::size_t>(ci)];
    for (EdgeId e : trees[static_cast<std::size_t>(a.from)].edge_sequence(g, keys[static_cast<std::size_t>(a.to)])) {
      in_union[static_cast<std::size_t>(e)] = true;
    }
  }

  // Re-span the union (expanded paths may overlap), on local node ids.
  std::vector<int> local(static_cast<std::size_t>(g.node_count()), -1);
  std::vector<NodeId> global;
  auto local_id = [&](NodeId v) {
    int& slot = local[static_cast<std::size_t>(v)];
    if (slot < 0) {
      slot = static_cast<int>(global.size());
      global.push_back(v);
    }
    return slot;
  };
  local_id(root);
  std::vector<Arc> union_arcs;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!in_union[static_cast<std::size_t>(e)]) continue;
    const Edge& ed = g.edge(e);
    union_arcs.push_back({local_id(ed.from), local_id(ed.to), w[static_cast<std::size_t>(e)], e});
  }
  auto span = min_arborescence(static_cast<int>(global.size()), union_arcs, 0);
  if (!span) throw RoutingError("steiner: expanded closure not rooted-connected");

  std::vector<EdgeId> edges;
  for (int i : *span) edges.push_back(union_arcs[static_cast<std::size_t>(i)].key);

  // Prune non-terminal leaves until none remain.
  std::vector<bool> is_terminal(static_cast<std::size_t>(g.node_count()), false);
  for (NodeId t : terminals) is_terminal[static_cast<std::size_t>(t)] = true;
  bool pruned = true;
  while (pruned) {
    pruned = false;
    std::vector<int> outdeg(static_cast<std::size_t>(g.node_count()), 0);
    for (EdgeId e : edges) ++outdeg[static_cast<std::size_t>(g.edge(e).from)];
    auto before = edges.size();
    std::erase_if(edges, [&](EdgeId e) {
      NodeId head = g.edge(e).to;
      return outdeg[static_cast<std::size_t>(head)] == 0 && !is_terminal[static_cast<std::size_t>(head)];
    });
    pruned = edges.size() != before;
  }
  return make_route(g, RouteKind::Tree, root, edges, terminals);
}

} // namespace qkd
