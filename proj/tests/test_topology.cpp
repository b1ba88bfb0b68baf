#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qkd/topology.hpp"

using namespace qkd;

TEST_CASE("undirected specs expand into mirrored directed edges") {
  auto g = build_graph(3, {EdgeSpec{0, 1, 2, 0.5}, EdgeSpec{1, 2, 1, 0.7, false, true}});
  REQUIRE(g.edge_count() == 3);
  CHECK(g.edge(0).from == 0);
  CHECK(g.edge(0).to == 1);
  CHECK(g.edge(1).from == 1);
  CHECK(g.edge(1).to == 0);
  CHECK(g.edge(0).reverse == 1);
  CHECK(g.edge(1).reverse == 0);
  CHECK(g.edge(2).reverse == -1);
  CHECK(g.edge(2).link == 1);
  CHECK(g.edge(1).gamma == 2);
  CHECK(g.max_gamma() == 2);
  CHECK(g.out_edges(1).size() == 2);
  CHECK(g.in_edges(1).size() == 1);
  CHECK(g.is_connected());
}

TEST_CASE("build_graph rejects malformed input") {
  CHECK_THROWS_AS(build_graph(2, {EdgeSpec{0, 2}}), GraphError);
  CHECK_THROWS_AS(build_graph(2, {EdgeSpec{1, 1}}), GraphError);
  CHECK_THROWS_AS(build_graph(2, {EdgeSpec{0, 1}, EdgeSpec{1, 0}}), GraphError);
  CHECK_THROWS_AS(build_graph(2, {EdgeSpec{0, 1, 0}}), GraphError);
  CHECK_THROWS_AS(build_graph(2, {EdgeSpec{0, 1, 1, 0.0}}), GraphError);
  CHECK_NOTHROW(build_graph(2, {EdgeSpec{0, 1, 1, 0.0, false}}));
  CHECK_NOTHROW(build_graph(2, {EdgeSpec{0, 1, 1, 1.0, true, true}, EdgeSpec{1, 0, 1, 1.0, true, true}}));
  CHECK_FALSE(build_graph(3, {EdgeSpec{0, 1}}).is_connected());
}

TEST_CASE("capacitated transform and secured mask") {
  auto g = build_graph(3, {EdgeSpec{0, 1, 1, 0.5}, EdgeSpec{1, 2, 3, 2.0}, EdgeSpec{0, 2, 4, 1.0, false}});
  auto w = capacitated_transform(g);
  CHECK(w[0] == 0.5);
  CHECK(w[2] == 2.0);
  CHECK(w[4] == 0.0);
  auto mask = secured_edge_mask(g);
  CHECK(mask == std::vector<bool>{true, true, true, true, false, false});
}

TEST_CASE("erdos_renyi is deterministic and has the expected density") {
  auto a = erdos_renyi(40, 0.3, 1, 0.2, 1.0, 17);
  auto b = erdos_renyi(40, 0.3, 1, 0.2, 1.0, 17);
  CHECK(a.specs() == b.specs());
  auto c = erdos_renyi(40, 0.3, 1, 0.2, 1.0, 18);
  CHECK(a.specs() != c.specs());
  double pairs = 40.0 * 39.0 / 2.0;
  CHECK(static_cast<double>(a.specs().size()) / pairs == doctest::Approx(0.3).epsilon(0.15));
  for (const auto& e : a.edges()) {
    CHECK(e.eta >= 0.2);
    CHECK(e.eta <= 1.0);
    CHECK(e.has_qkd);
  }
  CHECK_THROWS_AS(erdos_renyi(5, 0.0, 1, 0.2, 1.0, 1), GraphError);
  CHECK(erdos_renyi(5, 1.0, 1, 0.2, 1.0, 1).edge_count() == 20);
}

TEST_CASE("graph json round trip and file loading") {
  auto g = build_graph(4, {EdgeSpec{0, 1, 2, 0.25}, EdgeSpec{1, 2, 1, 0.75, true, true}, EdgeSpec{2, 3, 1, 1.0, false}});
  auto j = graph_to_json(g);
  auto h = graph_from_json(j);
  CHECK(h.specs() == g.specs());
  auto path = std::filesystem::temp_directory_path() / "qkd_topology_test.json";
  {
    std::ofstream out(path);
    out << j.dump();
  }
  CHECK(load_graph_file(path.string()).specs() == g.specs());
  std::filesystem::remove(path);
  CHECK_THROWS(load_graph_file("/nonexistent/graph.json"));
  CHECK_THROWS(graph_from_json(nlohmann::json{{"nodes", 2}}));
}
