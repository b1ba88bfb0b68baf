#include "qkd/engine.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace qkd {

std::string to_string(Scheduler s) {
  return s == Scheduler::Fifo ? "fifo" : "ento";
}

Scheduler scheduler_from_string(const std::string& s) {
  if (s == "fifo") return Scheduler::Fifo;
  if (s == "ento") return Scheduler::Ento;
  throw ConfigError("unknown scheduler '" + s + "' (expected fifo or ento)");
}

std::optional<double> ClassMetrics::mean_delay() const {
  if (delivered == 0) return std::nullopt;
  return static_cast<double>(delay_sum) / static_cast<double>(delivered);
}

std::optional<double> MetricsRecord::mean_delay() const {
  std::int64_t count = 0;
  std::int64_t sum = 0;
  for (const auto& c : classes) {
    count += c.delivered;
    sum += c.delay_sum;
  }
  if (count == 0) return std::nullopt;
  return static_cast<double>(sum) / static_cast<double>(count);
}

double MetricsRecord::delivered_rate(int cls) const {
  return static_cast<double>(classes.at(static_cast<std::size_t>(cls)).delivered) / static_cast<double>(horizon);
}

void EncryptionQueue::push(PacketCopy p) {
  auto it = std::find_if(levels_.begin(), levels_.end(), [&](const auto& l) { return l.first <= p.priority; });
  if (it == levels_.end() || it->first != p.priority) it = levels_.insert(it, {p.priority, {}});
  it->second.push_back(std::move(p));
  ++size_;
}

PacketCopy EncryptionQueue::pop() {
  for (auto& [prio, q] : levels_) {
    if (!q.empty()) {
      PacketCopy p = std::move(q.front());
      q.pop_front();
      --size_;
      return p;
    }
  }
  throw std::logic_error("EncryptionQueue::pop on empty queue");
}

namespace {

// Min-heap order for ENTO.
struct EntoLater {
  bool operator()(const PacketCopy& a, const PacketCopy& b) const {
    if (a.hops != b.hops) return a.hops > b.hops;
    if (a.id != b.id) return a.id > b.id;
    return a.seq > b.seq;
  }
};

} // namespace

void TransmissionQueue::push(PacketCopy p) {
  if (scheduler_ == Scheduler::Fifo) {
    fifo_.push_back(std::move(p));
  } else {
    heap_.push_back(std::move(p));
    std::push_heap(heap_.begin(), heap_.end(), EntoLater{});
  }
}

PacketCopy TransmissionQueue::pop() {
  if (empty()) throw std::logic_error("TransmissionQueue::pop on empty queue");
  if (scheduler_ == Scheduler::Fifo) {
    PacketCopy p = std::move(fifo_.front());
    fifo_.pop_front();
    return p;
  }
  std::pop_heap(heap_.begin(), heap_.end(), EntoLater{});
  PacketCopy p = std::move(heap_.back());
  heap_.pop_back();
  return p;
}

std::int64_t encrypt_phase(EncryptionQueue& x, TransmissionQueue& y, KeyBank& bank, bool key_storage,
                           std::int64_t y_capacity, std::int64_t limit) {
  const auto free_y = std::max<std::int64_t>(0, y_capacity - static_cast<std::int64_t>(y.size()));
  const std::int64_t want = std::min({static_cast<std::int64_t>(x.size()), free_y, limit});
  const std::int64_t moved = bank.withdraw(want);
  for (std::int64_t i = 0; i < moved; ++i) y.push(x.pop());
  if (!key_storage) bank.discard_all();
  return moved;
}

std::vector<PacketCopy> transmit_phase(TransmissionQueue& y, int gamma) {
  std::vector<PacketCopy> out;
  while (static_cast<int>(out.size()) < gamma && !y.empty()) out.push_back(y.pop());
  return out;
}

bool delivery_check(const PacketCopy& p) {
  return p.route && p.route->head_is_terminal[static_cast<std::size_t>(p.pos)];
}

std::vector<TrafficClass> check_simulation_inputs(const NetworkGraph& g, const SimulationConfig& config) {
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (config.series_stride < 1) throw ConfigError("series_stride must be >= 1");
  if (config.queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  std::vector<TrafficClass> classes;
  try {
    classes = validate_classes(g, config.classes);
  } catch (const TrafficError& err) {
    throw ConfigError(err.what());
  }
  const bool backpressure = std::holds_alternative<BackpressureMode>(config.mode);
  const bool etqd = std::holds_alternative<EtqdMode>(config.mode);
  const EdgeMask secured = secured_edge_mask(g);
  const EdgeWeights zero(static_cast<std::size_t>(g.edge_count()), 0.0);
  for (const auto& c : classes) {
    if (backpressure && c.kind != TrafficKind::Unicast) {
      throw ConfigError("class " + std::to_string(c.id) + ": backpressure supports unicast classes only");
    }
    const bool restricted = !etqd || c.security == Security::Quantum;
    try {
      (void)route_for_class(g, zero, c, restricted ? secured : EdgeMask{});
    } catch (const RoutingError& err) {
      throw ConfigError("class " + std::to_string(c.id) + " is not routable" +
                        (restricted ? " over QKD links: " : ": ") + err.what());
    }
  }
  return classes;
}

namespace {

struct Tracker {
  int cls = 0;
  std::int64_t birth = 0;
  int remaining = 0; // terminals not yet reached
  int copies = 0;    // live copies in the network
  bool dropped = false;
};

struct BpPacket {
  std::uint64_t id = 0;
  std::int64_t birth = 0;
  int hops = 0;
};

class Simulation {
 public:
  Simulation(const NetworkGraph& g, const SimulationConfig& config, const SlotObserver& observer)
      : g_(g), config_(config), observer_(observer), classes_(check_simulation_inputs(g, config)),
        m_(static_cast<std::size_t>(g.edge_count())), vq_(m_), streams_(make_streams(classes_, config.seed)) {
    std::visit(
        [this](const auto& mode) {
          using T = std::decay_t<decltype(mode)>;
          if constexpr (std::is_same_v<T, TqdMode>) storage_ = mode.key_storage;
          else if constexpr (std::is_same_v<T, SingleQueueMode>) single_queue_ = true;
          else if constexpr (std::is_same_v<T, BackpressureMode>) {
            backpressure_ = true;
            key_cap_ = mode.key_cap;
          } else {
            etqd_ = true;
            storage_ = mode.key_storage;
          }
        },
        config.mode);

    secured_ = secured_edge_mask(g);
    for (std::size_t e = 0; e < m_; ++e) {
      const Edge& ed = g.edge(static_cast<EdgeId>(e));
      gamma_.push_back(ed.gamma);
      KeyProcess proc = config.keys;
      if (auto* p = std::get_if<PoissonKeys>(&proc)) p->mean = ed.eta;
      key_procs_.push_back(proc);
      key_rngs_.emplace_back(derive_seed(config.seed, 0x200000 + e));
      x_.emplace_back();
      y_.emplace_back(config.scheduler);
    }
    banks_.resize(m_);
    fresh_.assign(m_, 0);
    encrypted_total_.assign(m_, 0);
    secured_sent_total_.assign(m_, 0);
    secured_in_y_.assign(m_, 0);
    x_after_enc_.assign(m_, 0);
    bank_after_enc_.assign(m_, 0);
    x_end_.assign(m_, 0);
    y_end_.assign(m_, 0);
    if (backpressure_) {
      bp_queues_.resize(static_cast<std::size_t>(g.node_count()) * classes_.size());
    }

    record_.policy = policy_label(config.mode);
    record_.seed = config.seed;
    record_.horizon = config.horizon;
    record_.classes.resize(classes_.size());
    double a_max = 0.0;
    for (const auto& c : classes_) a_max += max_arrivals(c.arrival);
    record_.drift_bound_B = drift_bound_B(g, a_max, key_cap(config.keys));
  }

  MetricsRecord run() {
    double residual_acc = 0.0;
    double backlog_acc = 0.0;
    double virtual_acc = 0.0;
    double prev_lyapunov = 0.0;
    for (std::int64_t t = 0; t < config_.horizon; ++t) {
      SlotSample sample;
      sample.slot = t;
      const auto arrivals_before = arrivals_;
      const auto delivered_before = delivered_;
      const auto dropped_before = dropped_;

      if (backpressure_) step_backpressure(t);
      else step_tandem(t);

      sample.arrivals = arrivals_ - arrivals_before;
      sample.delivered = delivered_ - delivered_before;
      sample.dropped = dropped_ - dropped_before;
      for (std::size_t e = 0; e < m_; ++e) sample.residual_keys += banks_[e].residual();
      if (backpressure_) {
        for (const auto& q : bp_queues_) sample.backlog_x += static_cast<std::int64_t>(q.size());
      } else {
        for (std::size_t e = 0; e < m_; ++e) {
          sample.backlog_x += x_end_[e];
          sample.backlog_y += y_end_[e];
        }
      }
      sample.virtual_sum = vq_.total();
      sample.in_flight = arrivals_ - delivered_ - dropped_;
      if (config_.drift_diagnostics) {
        sample.lyapunov = lyapunov(vq_);
        sample.drift = sample.lyapunov - prev_lyapunov;
        prev_lyapunov = sample.lyapunov;
      }

      residual_acc += static_cast<double>(sample.residual_keys);
      backlog_acc += static_cast<double>(sample.backlog_x + sample.backlog_y);
      virtual_acc += sample.virtual_sum;
      if (config_.record_series && (t % config_.series_stride == 0 || t + 1 == config_.horizon)) {
        record_.series.push_back(sample);
      }
    }
    const auto h = static_cast<double>(config_.horizon);
    record_.mean_residual_keys = residual_acc / h;
    record_.mean_backlog = backlog_acc / h;
    record_.mean_virtual_sum = virtual_acc / h;
    record_.arrivals = arrivals_;
    record_.delivered = delivered_;
    record_.dropped = dropped_;
    record_.in_flight = arrivals_ - delivered_ - dropped_;
    for (const auto& b : banks_) {
      record_.keys_generated += b.generated_total();
      record_.keys_consumed += b.consumed_total();
      record_.keys_discarded += b.discarded_total();
    }
    return std::move(record_);
  }

 private:
  void generate_keys_all() {
    for (std::size_t e = 0; e < m_; ++e) {
      fresh_[e] = secured_[e] ? generate_keys(key_procs_[e], key_rngs_[e]) : 0;
      banks_[e].deposit(fresh_[e]);
    }
  }

  void note_drop(Tracker& tr) {
    if (!tr.dropped) {
      tr.dropped = true;
      ++dropped_;
      ++record_.classes[static_cast<std::size_t>(tr.cls)].dropped;
    }
  }

  void release_copy(std::uint64_t id, Tracker& tr) {
    if (--tr.copies == 0) trackers_.erase(id);
  }

  // Places a copy in the first queue of its current edge.
  void enqueue(PacketCopy p, Tracker& tr) {
    const auto e = static_cast<std::size_t>(p.route->edges[static_cast<std::size_t>(p.pos)]);
    ++tr.copies;
    const auto cap = static_cast<std::size_t>(config_.queue_capacity);
    if (p.secured) {
      if (x_[e].size() < cap) {
        x_[e].push(std::move(p));
        return;
      }
    } else if (y_[e].size() < cap) {
      y_[e].push(std::move(p));
      return;
    }
    note_drop(tr);
    release_copy(p.id, tr);
  }

  void arrive(PacketCopy p, std::int64_t t) {
    auto it = trackers_.find(p.id);
    if (it == trackers_.end()) return;
    Tracker& tr = it->second;
    const auto pos = static_cast<std::size_t>(p.pos);
    ++p.hops;
    if (p.route->head_is_terminal[pos] && --tr.remaining == 0 && !tr.dropped) {
      ++delivered_;
      auto& cm = record_.classes[static_cast<std::size_t>(tr.cls)];
      ++cm.delivered;
      cm.delay_sum += t - tr.birth;
    }
    for (int child : p.route->children[pos]) {
      PacketCopy c = p;
      c.pos = child;
      c.seq = next_seq_++;
      enqueue(std::move(c), tr);
    }
    release_copy(p.id, tr);
  }

  void step_tandem(std::int64_t t) {
    const VirtualQueues before = vq_;
    const ArrivalBatch batch = sample_arrivals(streams_, t);

    // Edge weights and route assignment.
    std::map<int, Route> routes;
    if (etqd_) routes = etqd_select_routes(g_, vq_, batch, classes_);
    else routes = select_routes(g_, assign_weights(vq_), batch, classes_, secured_);
    auto is_secured_class = [this](int c) {
      return !etqd_ || classes_[static_cast<std::size_t>(c)].security == Security::Quantum;
    };
    const auto arrivals_x = per_edge_arrivals(m_, routes, batch, is_secured_class);
    const auto arrivals_y = per_edge_arrivals(m_, routes, batch);

    for (auto& [cls, route] : routes) {
      auto shared = std::make_shared<const Route>(std::move(route));
      const auto& tc = classes_[static_cast<std::size_t>(cls)];
      const int count = batch.counts[static_cast<std::size_t>(cls)];
      for (int k = 0; k < count; ++k) {
        const std::uint64_t id = next_id_++;
        ++arrivals_;
        ++record_.classes[static_cast<std::size_t>(cls)].arrivals;
        Tracker& tr = trackers_[id];
        tr = Tracker{cls, t, static_cast<int>(shared->terminals.size()), 1, false};
        for (int pos : shared->first) {
          PacketCopy p;
          p.id = id;
          p.seq = next_seq_++;
          p.cls = cls;
          p.pos = pos;
          p.birth = t;
          p.secured = is_secured_class(cls);
          p.priority = tc.priority;
          p.route = shared;
          enqueue(std::move(p), tr);
        }
        // The placeholder copy keeps the tracker alive while injecting.
        release_copy(id, tr);
      }
    }

    generate_keys_all();

    // Encryption.
    for (std::size_t e = 0; e < m_; ++e) {
      const std::int64_t limit = single_queue_ ? gamma_[e] : INT64_MAX;
      const bool keep = storage_ && !single_queue_;
      const auto moved = encrypt_phase(x_[e], y_[e], banks_[e], keep, config_.queue_capacity, limit);
      encrypted_total_[e] += moved;
      secured_in_y_[e] += moved;
      x_after_enc_[e] = static_cast<std::int64_t>(x_[e].size());
      bank_after_enc_[e] = banks_[e].residual();
    }

    // Forwarding; copies reach the next node within the slot but are only
    // served there from the next slot on.
    std::vector<PacketCopy> sent;
    for (std::size_t e = 0; e < m_; ++e) {
      for (auto& p : transmit_phase(y_[e], gamma_[e])) {
        if (p.secured) {
          ++secured_sent_total_[e];
          --secured_in_y_[e];
        }
        sent.push_back(std::move(p));
      }
    }
    // Decryption is bookkeeping only; delivery and forking happen on arrival.
    for (auto& p : sent) arrive(std::move(p), t);

    // Virtual queue update.
    const auto kappa = virtual_kappa(vq_, fresh_, storage_);
    if (storage_) virtual_key_update(vq_, arrivals_x, kappa);
    virtual_update(vq_, arrivals_x, arrivals_y, kappa, gamma_);

    for (std::size_t e = 0; e < m_; ++e) {
      x_end_[e] = static_cast<std::int64_t>(x_[e].size());
      y_end_[e] = static_cast<std::int64_t>(y_[e].size());
    }
    if (observer_) {
      SlotView v;
      v.slot = t;
      v.before = &before;
      v.after = &vq_;
      v.arrivals_x = arrivals_x;
      v.arrivals_y = arrivals_y;
      v.fresh_keys = fresh_;
      v.kappa = kappa;
      v.x_after_encryption = x_after_enc_;
      v.bank_after_encryption = bank_after_enc_;
      v.x_end = x_end_;
      v.y_end = y_end_;
      v.banks = banks_;
      v.encrypted_total = encrypted_total_;
      v.secured_sent_total = secured_sent_total_;
      v.secured_in_y = secured_in_y_;
      v.arrivals_total = arrivals_;
      v.delivered_total = delivered_;
      v.dropped_total = dropped_;
      v.in_flight = arrivals_ - delivered_ - dropped_;
      v.classes = record_.classes;
      observer_(v);
    }
  }

  std::deque<BpPacket>& bp_queue(NodeId v, int c) {
    return bp_queues_[static_cast<std::size_t>(v) * classes_.size() + static_cast<std::size_t>(c)];
  }

  void bp_deliver_or_queue(const BpPacket& p, NodeId at, int c, std::int64_t t) {
    auto& cm = record_.classes[static_cast<std::size_t>(c)];
    if (at == classes_[static_cast<std::size_t>(c)].destinations.front()) {
      ++delivered_;
      ++cm.delivered;
      cm.delay_sum += t - p.birth;
      return;
    }
    auto& q = bp_queue(at, c);
    if (static_cast<std::int64_t>(q.size()) < config_.queue_capacity) {
      q.push_back(p);
    } else {
      ++dropped_;
      ++cm.dropped;
    }
  }

  void step_backpressure(std::int64_t t) {
    const ArrivalBatch batch = sample_arrivals(streams_, t);
    for (const auto& c : classes_) {
      for (int k = 0; k < batch.counts[static_cast<std::size_t>(c.id)]; ++k) {
        ++arrivals_;
        ++record_.classes[static_cast<std::size_t>(c.id)].arrivals;
        bp_deliver_or_queue(BpPacket{next_id_++, t, 0}, c.source, c.id, t);
      }
    }
    generate_keys_all();
    std::vector<std::int64_t> kappa(m_);
    for (std::size_t e = 0; e < m_; ++e) {
      banks_[e].cap_at(key_cap_);
      kappa[e] = banks_[e].residual();
    }

    // Decisions use the backlog snapshot at the start of the phase.
    std::vector<std::int64_t> snapshot(bp_queues_.size());
    for (std::size_t i = 0; i < bp_queues_.size(); ++i) snapshot[i] = static_cast<std::int64_t>(bp_queues_[i].size());
    const std::size_t nc = classes_.size();
    auto backlog = [&](NodeId v, int c) { return snapshot[static_cast<std::size_t>(v) * nc + static_cast<std::size_t>(c)]; };
    const auto activations = backpressure_step(g_, classes_, backlog, kappa);

    struct InTransit {
      BpPacket p;
      NodeId to;
      int cls;
    };
    std::vector<InTransit> moving;
    for (const auto& act : activations) {
      const Edge& ed = g_.edge(act.edge);
      auto& q = bp_queue(ed.from, act.commodity);
      const auto n = std::min<std::int64_t>(act.count, static_cast<std::int64_t>(q.size()));
      const auto granted = banks_[static_cast<std::size_t>(act.edge)].withdraw(n);
      encrypted_total_[static_cast<std::size_t>(act.edge)] += granted;
      secured_sent_total_[static_cast<std::size_t>(act.edge)] += granted;
      for (std::int64_t i = 0; i < granted; ++i) {
        BpPacket p = q.front();
        q.pop_front();
        ++p.hops;
        moving.push_back({p, ed.to, act.commodity});
      }
    }
    for (const auto& m : moving) bp_deliver_or_queue(m.p, m.to, m.cls, t);

    if (observer_) {
      SlotView v;
      v.slot = t;
      v.before = &vq_;
      v.after = &vq_;
      v.fresh_keys = fresh_;
      v.banks = banks_;
      v.encrypted_total = encrypted_total_;
      v.secured_sent_total = secured_sent_total_;
      v.secured_in_y = secured_in_y_;
      v.arrivals_total = arrivals_;
      v.delivered_total = delivered_;
      v.dropped_total = dropped_;
      v.in_flight = arrivals_ - delivered_ - dropped_;
      v.classes = record_.classes;
      observer_(v);
    }
  }

  const NetworkGraph& g_;
  const SimulationConfig& config_;
  const SlotObserver& observer_;
  std::vector<TrafficClass> classes_;
  std::size_t m_;
  VirtualQueues vq_;
  std::vector<ArrivalStream> streams_;

  bool storage_ = false;
  bool single_queue_ = false;
  bool backpressure_ = false;
  bool etqd_ = false;
  std::int64_t key_cap_ = 0;

  EdgeMask secured_;
  std::vector<int> gamma_;
  std::vector<KeyProcess> key_procs_;
  std::vector<Rng> key_rngs_;
  std::vector<KeyBank> banks_;
  std::vector<EncryptionQueue> x_;
  std::vector<TransmissionQueue> y_;
  std::vector<int> fresh_;
  std::vector<std::int64_t> encrypted_total_;
  std::vector<std::int64_t> secured_sent_total_;
  std::vector<std::int64_t> secured_in_y_;
  std::vector<std::int64_t> x_after_enc_;
  std::vector<std::int64_t> bank_after_enc_;
  std::vector<std::int64_t> x_end_;
  std::vector<std::int64_t> y_end_;
  std::vector<std::deque<BpPacket>> bp_queues_;

  std::unordered_map<std::uint64_t, Tracker> trackers_;
  std::uint64_t next_id_ = 0;
  std::uint64_t next_seq_ = 0;
  std::int64_t arrivals_ = 0;
  std::int64_t delivered_ = 0;
  std::int64_t dropped_ = 0;
  MetricsRecord record_;
};

} // namespace

MetricsRecord simulate(const NetworkGraph& g, const SimulationConfig& config, const SlotObserver& observer) {
  Simulation sim(g, config, observer);
  return sim.run();
}

} // namespace qkd
