#include "qkd/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qkd {

std::string to_string(TrafficKind kind) {
  switch (kind) {
    case TrafficKind::Unicast: return "unicast";
    case TrafficKind::Broadcast: return "broadcast";
    case TrafficKind::Multicast: return "multicast";
    case TrafficKind::Anycast: return "anycast";
  }
  return "unknown";
}

std::string to_string(Security security) {
  return security == Security::Quantum ? "quantum" : "classical";
}

TrafficKind traffic_kind_from_string(const std::string& s) {
  if (s == "unicast") return TrafficKind::Unicast;
  if (s == "broadcast") return TrafficKind::Broadcast;
  if (s == "multicast") return TrafficKind::Multicast;
  if (s == "anycast") return TrafficKind::Anycast;
  throw TrafficError("unknown traffic kind '" + s + "'");
}

Security security_from_string(const std::string& s) {
  if (s == "quantum") return Security::Quantum;
  if (s == "classical") return Security::Classical;
  throw TrafficError("unknown security level '" + s + "'");
}

PpbpArrivals PpbpArrivals::with_rate(double rate) const {
  PpbpArrivals out = *this;
  out.burst_rate = rate / (packet_rate * burst_time);
  return out;
}

double mean_rate(const ArrivalProcess& p) {
  return std::visit(
      [](const auto& proc) -> double {
        using T = std::decay_t<decltype(proc)>;
        if constexpr (std::is_same_v<T, BernoulliArrivals>) return proc.rate;
        else if constexpr (std::is_same_v<T, PoissonArrivals>) return proc.mean;
        else return proc.mean_rate();
      },
      p);
}

int max_arrivals(const ArrivalProcess& p) {
  return std::visit(
      [](const auto& proc) -> int {
        using T = std::decay_t<decltype(proc)>;
        if constexpr (std::is_same_v<T, BernoulliArrivals>) return 1;
        else return proc.cap;
      },
      p);
}

ArrivalProcess with_rate(const ArrivalProcess& p, double rate) {
  return std::visit(
      [rate](const auto& proc) -> ArrivalProcess {
        using T = std::decay_t<decltype(proc)>;
        if constexpr (std::is_same_v<T, BernoulliArrivals>) return BernoulliArrivals{rate};
        else if constexpr (std::is_same_v<T, PoissonArrivals>) return PoissonArrivals{rate, proc.cap};
        else return proc.with_rate(rate);
      },
      p);
}

std::vector<TrafficClass> validate_classes(const NetworkGraph& g, std::vector<TrafficClass> classes) {
  const int n = g.node_count();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    TrafficClass& c = classes[i];
    auto where = "class " + std::to_string(i) + ": ";
    if (c.id != static_cast<int>(i)) throw TrafficError(where + "ids must be 0..C-1 in order");
    if (c.source < 0 || c.source >= n) throw TrafficError(where + "source out of range");
    if (c.kind == TrafficKind::Broadcast) {
      c.destinations.clear();
      for (NodeId v = 0; v < n; ++v) {
        if (v != c.source) c.destinations.push_back(v);
      }
    }
    if (c.destinations.empty()) throw TrafficError(where + "destination set is empty");
    if (c.kind == TrafficKind::Unicast && c.destinations.size() != 1) {
      throw TrafficError(where + "unicast needs exactly one destination");
    }
    std::sort(c.destinations.begin(), c.destinations.end());
    if (std::adjacent_find(c.destinations.begin(), c.destinations.end()) != c.destinations.end()) {
      throw TrafficError(where + "duplicate destination");
    }
    for (NodeId d : c.destinations) {
      if (d < 0 || d >= n) throw TrafficError(where + "destination out of range");
      if (d == c.source) throw TrafficError(where + "destination set contains the source");
    }
    double rate = mean_rate(c.arrival);
    if (!(rate >= 0.0)) throw TrafficError(where + "arrival rate must be non-negative");
    if (const auto* b = std::get_if<BernoulliArrivals>(&c.arrival); b && b->rate > 1.0) {
      throw TrafficError(where + "bernoulli rate must be <= 1");
    }
    if (max_arrivals(c.arrival) < 1) throw TrafficError(where + "arrival cap must be >= 1");
  }
  return classes;
}

int ppbp_state_advance(PpbpState& state, const PpbpArrivals& params, Rng& rng) {
  auto start_burst = [&] {
    double duration = pareto_with_mean(rng, params.on_shape(), params.burst_time);
    auto slots = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(duration)));
    auto packets = std::clamp<std::int64_t>(std::llround(params.packet_rate * duration),
                                            params.min_packets, params.max_packets);
    state.active.push_back({slots, packets});
  };

  if (params.burst_rate > 0.0) {
    if (params.gaps == BurstGaps::Poisson) {
      for (std::int64_t k = poisson(rng, params.burst_rate); k > 0; --k) start_burst();
    } else {
      const double mean_gap = 1.0 / params.burst_rate;
      if (state.next_start < 0.0) state.next_start = pareto_with_mean(rng, params.off_shape, mean_gap);
      const double slot_end = static_cast<double>(state.slot + 1);
      while (state.next_start < slot_end) {
        start_burst();
        state.next_start += pareto_with_mean(rng, params.off_shape, mean_gap);
      }
    }
  }

  std::int64_t total = 0;
  for (auto& b : state.active) {
    std::int64_t emit = (b.packets_left + b.slots_left - 1) / b.slots_left;
    total += emit;
    b.packets_left -= emit;
    b.slots_left -= 1;
  }
  std::erase_if(state.active, [](const PpbpState::Burst& b) { return b.slots_left <= 0; });
  ++state.slot;
  return static_cast<int>(std::min<std::int64_t>(total, params.cap));
}

ArrivalStream::ArrivalStream(ArrivalProcess process, std::uint64_t seed)
    : process_(std::move(process)), rng_(seed) {}

int ArrivalStream::next() {
  return std::visit(
      [this](const auto& proc) -> int {
        using T = std::decay_t<decltype(proc)>;
        if constexpr (std::is_same_v<T, BernoulliArrivals>) {
          return bernoulli(rng_, proc.rate) ? 1 : 0;
        } else if constexpr (std::is_same_v<T, PoissonArrivals>) {
          return static_cast<int>(std::min<std::int64_t>(poisson(rng_, proc.mean), proc.cap));
        } else {
          return ppbp_state_advance(ppbp_, proc, rng_);
        }
      },
      process_);
}

int ArrivalBatch::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0);
}

std::vector<ArrivalStream> make_streams(const std::vector<TrafficClass>& classes, std::uint64_t seed) {
  std::vector<ArrivalStream> streams;
  streams.reserve(classes.size());
  for (const auto& c : classes) {
    streams.emplace_back(c.arrival, derive_seed(seed, 0x1000 + static_cast<std::uint64_t>(c.id)));
  }
  return streams;
}

ArrivalBatch sample_arrivals(std::vector<ArrivalStream>& streams, std::int64_t slot) {
  ArrivalBatch batch;
  batch.slot = slot;
  batch.counts.reserve(streams.size());
  for (auto& s : streams) batch.counts.push_back(s.next());
  return batch;
}

} // namespace qkd
