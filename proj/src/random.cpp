#include "qkd/random.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool bernoulli(Rng& rng, double p) {
  return uniform01(rng) < p;
}

std::int64_t poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  double u = uniform01(rng);
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  // The 1e4 bound only guards against u rounding to ~1 for tiny tails.
  while (u >= cdf && k < 10000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0) break;
  }
  return k;
}

double pareto_with_mean(Rng& rng, double shape, double mean) {
  if (shape <= 1.0) throw std::invalid_argument("pareto shape must exceed 1");
  double scale = mean * (shape - 1.0) / shape;
  double u = 1.0 - uniform01(rng); // (0, 1]
  return scale / std::pow(u, 1.0 / shape);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over empty range");
  // Rejection sampling avoids modulo bias.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

} // namespace qkd
