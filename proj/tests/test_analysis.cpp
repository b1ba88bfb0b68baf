#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qkd/analysis.hpp"

using namespace qkd;

TEST_CASE("max flow on a textbook network") {
  std::vector<FlowArc> arcs{{0, 1, 3}, {0, 2, 2}, {1, 2, 1}, {1, 3, 2}, {2, 3, 3}};
  std::vector<double> flow;
  CHECK(max_flow(4, arcs, 0, 3, &flow) == doctest::Approx(5.0));
  double out0 = flow[0] + flow[1];
  CHECK(out0 == doctest::Approx(5.0));
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    CHECK(flow[i] >= -1e-12);
    CHECK(flow[i] <= arcs[i].capacity + 1e-12);
  }
}

TEST_CASE("unicast capacity uses min(gamma, eta) on QKD links") {
  auto g = build_graph(2, {EdgeSpec{0, 1, 1, 0.5, true, true}});
  auto v = unicast_capacity(g, 0, 1);
  CHECK(v.lambda_star == 0.5);
  CHECK(v.edge_flow[0] == 0.5);
  auto h = build_graph(3, {EdgeSpec{0, 1, 1, 0.5}, EdgeSpec{1, 2, 1, 0.5, false}});
  CHECK(unicast_capacity(h, 0, 2).lambda_star == 0.0);
  CHECK_THROWS(unicast_capacity(g, 0, 0));
  CHECK_THROWS(unicast_capacity(g, 0, 5));
}

TEST_CASE("capacity agrees with min cut enumeration") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 3 + static_cast<int>(rng() % 4);
    auto base = oracle::random_graph(rng, n, 0.5);
    std::vector<EdgeSpec> specs = base.specs();
    for (auto& s : specs) {
      s.gamma = 1 + static_cast<int>(rng() % 2);
      s.eta = 0.05 * static_cast<double>(1 + rng() % 30);
    }
    auto g = build_graph(n, specs);
    double mf = unicast_capacity(g, 0, n - 1).lambda_star;
    CHECK(mf == doctest::Approx(oracle::min_cut_enumeration(g, capacitated_transform(g), 0, n - 1)));
  }
}

TEST_CASE("least squares slope") {
  std::vector<double> ys;
  for (int i = 0; i < 100; ++i) ys.push_back(2.5 * i - 7.0);
  CHECK(least_squares_slope(ys) == doctest::Approx(2.5));
  std::vector<double> flat(50, 3.0);
  CHECK(least_squares_slope(flat) == doctest::Approx(0.0));
}

TEST_CASE("stability verdicts") {
  std::vector<double> growing, bounded, drifting;
  for (int i = 0; i < 4000; ++i) {
    growing.push_back(0.05 * i);
    bounded.push_back(i % 7);
    drifting.push_back(0.003 * i);
  }
  CHECK(stability_test(growing, 1000, 1e-3).verdict == Stability::Unstable);
  CHECK(stability_test(bounded, 1000, 1e-3).verdict == Stability::Stable);
  CHECK(stability_test(bounded, 1000, 1e-3, 1.0).verdict == Stability::Inconclusive);
  CHECK(stability_test(drifting, 1000, 1e-3).verdict == Stability::Inconclusive);
  CHECK_THROWS(stability_test(bounded, 3000, 1e-3)); // too short
  CHECK(to_string(Stability::Stable) == "stable");
}

TEST_CASE("estimates and summaries") {
  std::vector<double> xs{1, 2, 3, 4};
  auto e = estimate(xs);
  CHECK(e.mean == 2.5);
  CHECK(e.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(e.samples == 4);

  MetricsRecord a, b;
  for (auto* r : {&a, &b}) {
    r->policy = "tqd-storage";
    r->horizon = 100;
    r->classes.resize(1);
  }
  a.classes[0] = {10, 8, 1, 16};
  a.arrivals = 10;
  a.delivered = 8;
  a.dropped = 1;
  a.in_flight = 1;
  b.classes[0] = {10, 10, 0, 40};
  b.arrivals = 10;
  b.delivered = 10;
  std::vector<MetricsRecord> runs{a, b};
  auto s = summarize(runs);
  CHECK(s.seeds == 2);
  CHECK(s.mean_delay->mean == doctest::Approx(3.0));
  CHECK(s.classes[0].delivered_rate.mean == doctest::Approx(0.09));
  CHECK(s.conserved);
  auto j = summary_to_json(s);
  CHECK(j["policy"] == "tqd-storage");
  runs[1].in_flight = 3;
  CHECK_FALSE(summarize(runs).conserved);
}
