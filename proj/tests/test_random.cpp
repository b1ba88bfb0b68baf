#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qkd/random.hpp"

using namespace qkd;

TEST_CASE("derived seeds differ per stream and are reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("uniform01 stays in [0, 1) with the right mean") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) {
    double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 200000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("bernoulli edge probabilities") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(bernoulli(rng, 0.0));
    CHECK(bernoulli(rng, 1.0));
  }
}

TEST_CASE("poisson mean and variance") {
  Rng rng(3);
  const int n = 200000;
  for (double mean : {0.3, 1.0, 4.5}) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      auto k = static_cast<double>(poisson(rng, mean));
      s += k;
      s2 += k * k;
    }
    double m = s / n;
    CHECK(m == doctest::Approx(mean).epsilon(0.02));
    CHECK(s2 / n - m * m == doctest::Approx(mean).epsilon(0.04));
  }
  CHECK(poisson(rng, 0.0) == 0);
}

TEST_CASE("pareto_with_mean hits the mean and respects the scale") {
  Rng rng(5);
  const double shape = 3.0, mean = 5.0;
  const double scale = mean * (shape - 1.0) / shape;
  double s = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    double x = pareto_with_mean(rng, shape, mean);
    REQUIRE(x >= scale);
    s += x;
  }
  CHECK(s / n == doctest::Approx(mean).epsilon(0.02));
}

TEST_CASE("uniform_index covers the range evenly") {
  Rng rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto k = uniform_index(rng, 7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}
