#pragma once

#include <cstdint>
#include <variant>

#include "qkd/random.hpp"

namespace qkd {

/// K_e(t) ~ Poisson(mean) truncated at cap.
struct PoissonKeys {
  double mean = 1.0;
  int cap = 20;
  bool operator==(const PoissonKeys&) const = default;
};

struct DeterministicKeys {
  int value = 1;
  bool operator==(const DeterministicKeys&) const = default;
};

/// Keys distilled by one toy BB84 round per slot.
struct Bb84Keys {
  int photons = 8;
  double eavesdrop_prob = 0.0;
  double check_fraction = 0.0;
  int cap = 20;
  bool operator==(const Bb84Keys&) const = default;
};

using KeyProcess = std::variant<PoissonKeys, DeterministicKeys, Bb84Keys>;

int key_cap(const KeyProcess& proc);

/// One slot of key generation, always within [0, key_cap(proc)].
int generate_keys(const KeyProcess& proc, Rng& rng);

struct Bb84Result {
  int sifted = 0;      // photons whose bases matched
  int checked = 0;     // sifted bits publicly compared
  int mismatches = 0;  // checked bits that disagreed
  bool detected_eavesdrop = false;
  int key_bits = 0;    // sifted - checked, or 0 when the key is discarded
};

/// Toy BB84 exchange of `photons` single photons. Alice and Bob pick bases
/// uniformly; with probability eavesdrop_prob per photon an intercept-resend
/// attacker measures in a random basis and resends. A uniformly random
/// subset of ceil(check_fraction * sifted) sifted bits is compared; any
/// mismatch discards the whole key.
Bb84Result bb84_round(int photons, double eavesdrop_prob, double check_fraction, Rng& rng);

/// Per-edge store of unconsumed keys. Keys are fungible, so only counts are
/// tracked. residual == generated - consumed - discarded at all times.
class KeyBank {
 public:
  void deposit(std::int64_t count);
  /// Grants min(requested, residual) and returns the grant.
  std::int64_t withdraw(std::int64_t requested);
  /// Drops every residual key (no-storage operation).
  void discard_all();
  /// Drops keys above `limit`.
  void cap_at(std::int64_t limit);

  std::int64_t residual() const { return residual_; }
  std::int64_t generated_total() const { return generated_; }
  std::int64_t consumed_total() const { return consumed_; }
  std::int64_t discarded_total() const { return discarded_; }
  bool ledger_consistent() const {
    return residual_ >= 0 && residual_ == generated_ - consumed_ - discarded_;
  }

 private:
  std::int64_t residual_ = 0;
  std::int64_t generated_ = 0;
  std::int64_t consumed_ = 0;
  std::int64_t discarded_ = 0;
};

} // namespace qkd
