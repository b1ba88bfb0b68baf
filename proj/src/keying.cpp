#include "qkd/keying.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qkd {

int key_cap(const KeyProcess& proc) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DeterministicKeys>) return p.value;
        else return p.cap;
      },
      proc);
}

int generate_keys(const KeyProcess& proc, Rng& rng) {
  return std::visit(
      [&rng](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PoissonKeys>) {
          return static_cast<int>(std::min<std::int64_t>(poisson(rng, p.mean), p.cap));
        } else if constexpr (std::is_same_v<T, DeterministicKeys>) {
          return p.value;
        } else {
          auto r = bb84_round(p.photons, p.eavesdrop_prob, p.check_fraction, rng);
          return std::min(r.key_bits, p.cap);
        }
      },
      proc);
}

Bb84Result bb84_round(int photons, double eavesdrop_prob, double check_fraction, Rng& rng) {
  if (photons < 0) throw std::invalid_argument("bb84_round: photons must be >= 0");
  Bb84Result out;
  // Bits Bob kept after sifting, paired with whether they agree with Alice.
  std::vector<bool> agree;
  agree.reserve(static_cast<std::size_t>(photons));
  for (int i = 0; i < photons; ++i) {
    const bool alice_bit = bernoulli(rng, 0.5);
    const bool alice_basis = bernoulli(rng, 0.5);
    bool photon_bit = alice_bit;
    bool photon_basis = alice_basis;
    if (eavesdrop_prob > 0.0 && bernoulli(rng, eavesdrop_prob)) {
      const bool eve_basis = bernoulli(rng, 0.5);
      const bool eve_bit = eve_basis == photon_basis ? photon_bit : bernoulli(rng, 0.5);
      photon_bit = eve_bit;
      photon_basis = eve_basis;
    }
    const bool bob_basis = bernoulli(rng, 0.5);
    const bool bob_bit = bob_basis == photon_basis ? photon_bit : bernoulli(rng, 0.5);
    if (bob_basis == alice_basis) agree.push_back(bob_bit == alice_bit);
  }
  out.sifted = static_cast<int>(agree.size());

  const auto to_check = std::min<std::size_t>(
      agree.size(), static_cast<std::size_t>(std::ceil(check_fraction * static_cast<double>(agree.size()))));
  // Partial Fisher-Yates: the first to_check entries become a uniform subset.
  for (std::size_t i = 0; i < to_check; ++i) {
    auto j = i + uniform_index(rng, agree.size() - i);
    std::swap(agree[i], agree[j]);
    if (!agree[i]) ++out.mismatches;
  }
  out.checked = static_cast<int>(to_check);
  out.detected_eavesdrop = out.mismatches > 0;
  out.key_bits = out.detected_eavesdrop ? 0 : out.sifted - out.checked;
  return out;
}

void KeyBank::deposit(std::int64_t count) {
  if (count < 0) throw std::invalid_argument("KeyBank::deposit: negative count");
  residual_ += count;
  generated_ += count;
}

std::int64_t KeyBank::withdraw(std::int64_t requested) {
  if (requested < 0) throw std::invalid_argument("KeyBank::withdraw: negative request");
  const std::int64_t granted = std::min(requested, residual_);
  residual_ -= granted;
  consumed_ += granted;
  return granted;
}

void KeyBank::discard_all() {
  discarded_ += residual_;
  residual_ = 0;
}

void KeyBank::cap_at(std::int64_t limit) {
  if (residual_ > limit) {
    discarded_ += residual_ - limit;
    residual_ = limit;
  }
}

} // namespace qkd
