#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkd/keying.hpp"
#include "qkd/policy.hpp"
#include "qkd/topology.hpp"
#include "qkd/traffic.hpp"

namespace qkd {

/// Order in which a link's transmission queue is served.
enum class Scheduler { Fifo, Ento };

std::string to_string(Scheduler s);
Scheduler scheduler_from_string(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationConfig {
  std::vector<TrafficClass> classes;
  PolicyMode mode = TqdMode{true};
  Scheduler scheduler = Scheduler::Fifo;
  std::int64_t horizon = 1000;
  std::uint64_t seed = 1;
  /// Key process applied to every QKD edge. A PoissonKeys template takes its
  /// mean from each edge's eta; the other processes are used as given.
  KeyProcess keys = PoissonKeys{1.0, 20};
  /// Physical queue capacity Q_c, per queue.
  std::int64_t queue_capacity = 10000;
  bool record_series = true;
  std::int64_t series_stride = 1;
  bool drift_diagnostics = false;
};

struct ClassMetrics {
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t delay_sum = 0;
  std::optional<double> mean_delay() const;
};

struct SlotSample {
  std::int64_t slot = 0;
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t backlog_x = 0; // physical packets awaiting keys (or BP node queues)
  std::int64_t backlog_y = 0; // physical packets awaiting transmission
  double virtual_sum = 0.0;   // sum_e (x~ + y~) after the slot
  std::int64_t residual_keys = 0;
  std::int64_t in_flight = 0;
  double lyapunov = 0.0;
  double drift = 0.0;
};

struct MetricsRecord {
  std::string policy;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  std::vector<ClassMetrics> classes;
  std::vector<SlotSample> series;

  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t in_flight = 0;
  std::int64_t keys_generated = 0;
  std::int64_t keys_consumed = 0;
  std::int64_t keys_discarded = 0;
  double mean_residual_keys = 0.0; // time average of the summed key banks
  double mean_backlog = 0.0;       // time average of backlog_x + backlog_y
  double mean_virtual_sum = 0.0;   // time average of sum_e (x~ + y~)
  double drift_bound_B = 0.0;

  std::optional<double> mean_delay() const; // over all delivered packets
  double delivered_rate(int cls) const;
};

/// Everything an observer may inspect after one slot. Vectors are indexed
/// by edge id. Used by tests to check invariants without reaching into the
/// engine.
struct SlotView {
  std::int64_t slot = 0;
  const VirtualQueues* before = nullptr; // x~(t), y~(t)
  const VirtualQueues* after = nullptr;  // x~(t+1), y~(t+1)
  std::span<const std::int64_t> arrivals_x;
  std::span<const std::int64_t> arrivals_y;
  std::span<const int> fresh_keys;
  std::span<const std::int64_t> kappa; // virtual kappa used in the recursion
  std::span<const std::int64_t> x_after_encryption;
  std::span<const std::int64_t> bank_after_encryption;
  std::span<const std::int64_t> x_end;
  std::span<const std::int64_t> y_end;
  std::span<const KeyBank> banks;
  std::span<const std::int64_t> encrypted_total;
  std::span<const std::int64_t> secured_sent_total;
  std::span<const std::int64_t> secured_in_y;
  std::int64_t arrivals_total = 0;
  std::int64_t delivered_total = 0;
  std::int64_t dropped_total = 0;
  std::int64_t in_flight = 0;
  std::span<const ClassMetrics> classes;
};

using SlotObserver = std::function<void(const SlotView&)>;

/// Runs the slotted loop: weights, routes, key generation, encryption,
/// forwarding (with decryption and delivery at the next node) and the
/// virtual-queue update. Deterministic for a fixed config.
MetricsRecord simulate(const NetworkGraph& g, const SimulationConfig& config, const SlotObserver& observer = {});

/// Checks classes against the graph and the policy mode. Throws ConfigError.
std::vector<TrafficClass> check_simulation_inputs(const NetworkGraph& g, const SimulationConfig& config);

// Single-link building blocks, exposed for direct testing.

struct PacketCopy {
  std::uint64_t id = 0;
  std::uint64_t seq = 0; // unique per copy, breaks scheduler ties
  int cls = 0;
  int pos = 0;  // position of the current edge in the route
  int hops = 0; // edges already traversed
  std::int64_t birth = 0;
  bool secured = true;
  int priority = 0;
  std::shared_ptr<const Route> route;
};

/// Packets awaiting keys, served by descending priority, FIFO within one.
class EncryptionQueue {
 public:
  void push(PacketCopy p);
  PacketCopy pop();
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

 private:
  std::vector<std::pair<int, std::deque<PacketCopy>>> levels_; // descending priority
  std::size_t size_ = 0;
};

/// Packets awaiting transmission. ENTO serves the fewest hops traversed
/// first, ties by packet id then copy sequence.
class TransmissionQueue {
 public:
  explicit TransmissionQueue(Scheduler s = Scheduler::Fifo) : scheduler_(s) {}
  void push(PacketCopy p);
  PacketCopy pop();
  std::size_t size() const { return scheduler_ == Scheduler::Fifo ? fifo_.size() : heap_.size(); }
  bool empty() const { return size() == 0; }

 private:
  Scheduler scheduler_;
  std::deque<PacketCopy> fifo_;
  std::vector<PacketCopy> heap_;
};

/// Moves min(keys in bank, |x|, free space in y) packets from x to y,
/// withdrawing one key each. Discards the remaining keys when !key_storage.
std::int64_t encrypt_phase(EncryptionQueue& x, TransmissionQueue& y, KeyBank& bank, bool key_storage,
                           std::int64_t y_capacity = INT64_MAX, std::int64_t limit = INT64_MAX);

/// Pops up to gamma packets from y in scheduler order.
std::vector<PacketCopy> transmit_phase(TransmissionQueue& y, int gamma);

/// True when the copy's current edge ends at one of its route's terminals.
bool delivery_check(const PacketCopy& p);

} // namespace qkd
