#pragma once

#include <cstdint>
#include <random>

namespace qkd {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream tag
/// (splitmix64 finalizer). Used so every arrival/key stream owns its RNG.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
/// Portable across standard libraries, unlike std::uniform_real_distribution.
double uniform01(Rng& rng);

bool bernoulli(Rng& rng, double p);

/// Poisson sample by sequential inversion. Intended for the small means used
/// by arrival and key processes (mean well below ~50).
std::int64_t poisson(Rng& rng, double mean);

/// Pareto sample with the given shape and mean (shape must exceed 1).
double pareto_with_mean(Rng& rng, double shape, double mean);

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

} // namespace qkd
