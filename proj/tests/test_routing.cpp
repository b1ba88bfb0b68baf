#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qkd/routing.hpp"

using namespace qkd;

namespace {

NetworkGraph diamond() {
  // 0 -> 1 -> 3 and 0 -> 2 -> 3, undirected.
  return build_graph(4, {EdgeSpec{0, 1}, EdgeSpec{0, 2}, EdgeSpec{1, 3}, EdgeSpec{2, 3}});
}

} // namespace

TEST_CASE("path ties break by hops then node sequence") {
  auto g = diamond();
  EdgeWeights w(static_cast<std::size_t>(g.edge_count()), 1.0);
  auto r = min_weight_path(g, w, 0, 3);
  CHECK(r.nodes(g) == std::vector<NodeId>{0, 1, 3});
  w[0] = 2.0; // 0->1 now costlier
  CHECK(min_weight_path(g, w, 0, 3).nodes(g) == std::vector<NodeId>{0, 2, 3});
  CHECK_FALSE(validate_route(g, r).has_value());
  CHECK(r.terminals == std::vector<NodeId>{3});
}

TEST_CASE("path errors and masks") {
  auto g = diamond();
  EdgeWeights w(static_cast<std::size_t>(g.edge_count()), 0.0);
  CHECK_THROWS_AS(min_weight_path(g, w, 0, 0), RoutingError);
  EdgeMask mask(static_cast<std::size_t>(g.edge_count()), false);
  CHECK_THROWS_AS(min_weight_path(g, w, 0, 3, mask), RoutingError);
  mask[2] = mask[6] = true; // 0->2, 2->3
  CHECK(min_weight_path(g, w, 0, 3, mask).nodes(g) == std::vector<NodeId>{0, 2, 3});
  CHECK_THROWS_AS(min_weight_path(g, EdgeWeights{1.0}, 0, 3), RoutingError);
}

TEST_CASE("min arborescence picks cheap incoming arcs and resolves cycles") {
  // Classic example where the greedy choice forms a cycle 1 <-> 2.
  std::vector<Arc> arcs{{0, 1, 10, 0}, {0, 2, 10, 1}, {1, 2, 1, 2}, {2, 1, 1, 3}, {2, 3, 5, 4}};
  auto a = min_arborescence(4, arcs, 0);
  REQUIRE(a.has_value());
  double total = 0.0;
  for (int i : *a) total += arcs[static_cast<std::size_t>(i)].weight;
  CHECK(total == 16.0);
  CHECK_FALSE(min_arborescence(3, {{0, 1, 1, 0}}, 0).has_value());
}

TEST_CASE("spanning tree handles asymmetric weights") {
  auto g = build_graph(3, {EdgeSpec{0, 1}, EdgeSpec{1, 2}, EdgeSpec{0, 2}});
  // Edge ids: 0:0->1 1:1->0 2:1->2 3:2->1 4:0->2 5:2->0
  EdgeWeights w{1, 0, 5, 1, 2, 0};
  auto t = min_weight_spanning_tree(g, w, 0);
  CHECK(t.weight(w) == 3.0); // 0->1, 0->2
  CHECK_FALSE(validate_route(g, t).has_value());
  CHECK(t.terminals == std::vector<NodeId>{1, 2});
}

TEST_CASE("anycast chooses the cheapest candidate") {
  auto g = build_graph(4, {EdgeSpec{0, 1}, EdgeSpec{1, 2}, EdgeSpec{0, 3}});
  EdgeWeights w(static_cast<std::size_t>(g.edge_count()), 1.0);
  auto r = anycast_route(g, w, 0, {2, 3});
  CHECK(r.terminals == std::vector<NodeId>{3});
  w[4] = 5.0;
  CHECK(anycast_route(g, w, 0, {2, 3}).terminals == std::vector<NodeId>{2});
}

TEST_CASE("steiner tree keeps only what terminals need") {
  auto g = build_graph(5, {EdgeSpec{0, 1}, EdgeSpec{1, 2}, EdgeSpec{1, 3}, EdgeSpec{3, 4}});
  EdgeWeights w(static_cast<std::size_t>(g.edge_count()), 1.0);
  auto t = steiner_tree_approx(g, w, 0, {2, 3});
  CHECK(t.weight(w) == 3.0);
  CHECK_FALSE(validate_route(g, t).has_value());
  CHECK_FALSE(t.contains(6)); // 3->4 not needed
}

TEST_CASE("make_route rejects non-trees and validate_route flags bad leaves") {
  auto g = diamond();
  CHECK_THROWS_AS(make_route(g, RouteKind::Tree, 0, {0, 5}, {3}), RoutingError); // node 1 gets two parents
  auto r = make_route(g, RouteKind::Tree, 0, {0, 2, 4}, {3});
  CHECK(validate_route(g, r).has_value()); // 2 is a non-terminal leaf
}

TEST_CASE("small random instances agree with brute force") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 3 + static_cast<int>(rng() % 4);
    auto g = oracle::random_graph(rng, n, 0.4);
    auto w = oracle::integer_weights(rng, g, 5, false);
    NodeId s = 0, t = n - 1;
    auto best = oracle::best_path(g, w, s, t);
    REQUIRE(best.has_value());
    auto r = min_weight_path(g, w, s, t);
    CHECK(r.nodes(g) == best->nodes);
    auto tree = min_weight_spanning_tree(g, w, s);
    std::vector<NodeId> all(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) all[static_cast<std::size_t>(v)] = v;
    CHECK(tree.weight(w) == *oracle::min_spanning_out_tree(g, w, s, all));
  }
}
