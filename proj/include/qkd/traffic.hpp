#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkd/random.hpp"
#include "qkd/topology.hpp"

namespace qkd {

enum class TrafficKind { Unicast, Broadcast, Multicast, Anycast };
enum class Security { Quantum, Classical };

std::string to_string(TrafficKind kind);
std::string to_string(Security security);
TrafficKind traffic_kind_from_string(const std::string& s);
Security security_from_string(const std::string& s);

/// At most one packet per slot, with probability `rate`.
struct BernoulliArrivals {
  double rate = 0.0;
  bool operator==(const BernoulliArrivals&) const = default;
};

/// Poisson(mean) truncated at `cap`.
struct PoissonArrivals {
  double mean = 0.0;
  int cap = 20;
  bool operator==(const PoissonArrivals&) const = default;
};

enum class BurstGaps { Poisson, Pareto };

/// Poisson Pareto burst process in slotted time. Bursts start either as a
/// Poisson stream (`burst_rate` per slot) or as a renewal process with
/// Pareto(off_shape) gaps of mean 1/burst_rate (the default 0.04 gives the
/// 25-slot mean sleep time). Each burst lasts a
/// Pareto(on_shape) number of slots with mean `burst_time` and emits its
/// packets uniformly over that span at `packet_rate` per slot.
struct PpbpArrivals {
  double burst_rate = 0.04;
  double packet_rate = 1.0;
  double burst_time = 5.0;  // mean ON duration (slots)
  double hurst = 0.8;       // ON shape = 3 - 2H
  double off_shape = 1.2;
  int min_packets = 1;
  int max_packets = 5000;
  int cap = 100; // per-slot output bound
  BurstGaps gaps = BurstGaps::Poisson;

  double on_shape() const { return 3.0 - 2.0 * hurst; }
  /// Aggregate packets per slot, ignoring clamping and truncation.
  double mean_rate() const { return burst_rate * packet_rate * burst_time; }
  /// Same process rescaled to a target aggregate rate via burst_rate.
  PpbpArrivals with_rate(double rate) const;

  bool operator==(const PpbpArrivals&) const = default;
};

using ArrivalProcess = std::variant<BernoulliArrivals, PoissonArrivals, PpbpArrivals>;

double mean_rate(const ArrivalProcess& p);
int max_arrivals(const ArrivalProcess& p);
ArrivalProcess with_rate(const ArrivalProcess& p, double rate);

struct TrafficClass {
  int id = 0;
  NodeId source = 0;
  TrafficKind kind = TrafficKind::Unicast;
  /// Unicast: one node. Multicast: the group. Anycast: candidates.
  /// Broadcast: filled with every other node by validate_classes.
  std::vector<NodeId> destinations;
  ArrivalProcess arrival = BernoulliArrivals{};
  Security security = Security::Quantum;
  int priority = 0; // larger is served first in the encryption queue

  bool operator==(const TrafficClass&) const = default;
};

class TrafficError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks ids are 0..C-1 in order, endpoints in range, destination sets
/// non-empty and free of the source; expands broadcast destinations.
std::vector<TrafficClass> validate_classes(const NetworkGraph& g, std::vector<TrafficClass> classes);

struct PpbpState {
  struct Burst {
    std::int64_t slots_left = 0;
    std::int64_t packets_left = 0;
  };
  std::vector<Burst> active;
  double next_start = -1.0; // renewal clock for Pareto gaps; < 0 means unset
  std::int64_t slot = 0;
};

/// Advances the process by one slot and returns the packets emitted in it,
/// capped at params.cap.
int ppbp_state_advance(PpbpState& state, const PpbpArrivals& params, Rng& rng);

/// One independently seeded arrival stream per class.
class ArrivalStream {
 public:
  ArrivalStream(ArrivalProcess process, std::uint64_t seed);
  int next();
  const ArrivalProcess& process() const { return process_; }

 private:
  ArrivalProcess process_;
  Rng rng_;
  PpbpState ppbp_;
};

struct ArrivalBatch {
  std::int64_t slot = 0;
  std::vector<int> counts; // indexed by class id
  int total() const;
};

std::vector<ArrivalStream> make_streams(const std::vector<TrafficClass>& classes, std::uint64_t seed);

ArrivalBatch sample_arrivals(std::vector<ArrivalStream>& streams, std::int64_t slot);

} // namespace qkd
