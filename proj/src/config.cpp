#include "qkd/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qkd/random.hpp"

namespace qkd {

using nlohmann::json;

namespace {

// Field access with path-qualified errors.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(path_.empty() ? msg : path_ + ": " + msg);
  }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }
  void require_array() const {
    if (!j_.is_array()) fail("expected an array");
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Node at(const std::string& key) const {
    require_object();
    if (!j_.contains(key)) child_path_fail(key, "missing required field");
    return Node(j_.at(key), join(key));
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const { return j_.size(); }

  double num() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<std::int64_t>();
  }
  std::uint64_t uinteger() const {
    if (!j_.is_number_integer() || (j_.is_number_integer() && !j_.is_number_unsigned() && j_.get<std::int64_t>() < 0))
      fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  double num_or(const std::string& k, double d) const { return has(k) ? at(k).num() : d; }
  std::int64_t int_or(const std::string& k, std::int64_t d) const { return has(k) ? at(k).integer() : d; }
  std::uint64_t uint_or(const std::string& k, std::uint64_t d) const { return has(k) ? at(k).uinteger() : d; }
  bool bool_or(const std::string& k, bool d) const { return has(k) ? at(k).boolean() : d; }
  std::string str_or(const std::string& k, const std::string& d) const { return has(k) ? at(k).str() : d; }

  void only(std::initializer_list<const char*> keys) const {
    require_object();
    for (const auto& [k, _] : j_.items()) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) child_path_fail(k, "unknown field");
    }
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void child_path_fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(join(key) + ": " + msg);
  }

  const json& j_;
  std::string path_;
};

template <class F>
auto guarded(const Node& n, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    n.fail(e.what());
  }
}

int to_int(const Node& n) {
  auto v = n.integer();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) n.fail("integer out of range");
  return static_cast<int>(v);
}

int int_field(const Node& n, const std::string& k, int d) { return n.has(k) ? to_int(n.at(k)) : d; }

EdgeSpec parse_edge(const Node& n) {
  n.only({"from", "to", "gamma", "eta", "has_qkd", "directed"});
  EdgeSpec s;
  s.from = to_int(n.at("from"));
  s.to = to_int(n.at("to"));
  s.gamma = int_field(n, "gamma", s.gamma);
  s.eta = n.num_or("eta", s.eta);
  s.has_qkd = n.bool_or("has_qkd", s.has_qkd);
  s.directed = n.bool_or("directed", s.directed);
  return s;
}

GraphSource parse_graph(const Node& n) {
  n.require_object();
  GraphSource g;
  std::string type = n.at("type").str();
  if (type == "inline") {
    n.only({"type", "nodes", "edges"});
    g.kind = GraphSource::Kind::Inline;
    g.nodes = to_int(n.at("nodes"));
    Node edges = n.at("edges");
    edges.require_array();
    for (std::size_t i = 0; i < edges.size(); ++i) g.edges.push_back(parse_edge(edges.at(i)));
  } else if (type == "file") {
    n.only({"type", "path"});
    g.kind = GraphSource::Kind::File;
    g.path = n.at("path").str();
  } else if (type == "erdos_renyi") {
    n.only({"type", "nodes", "p", "gamma", "eta_min", "eta_max", "seed"});
    g.kind = GraphSource::Kind::ErdosRenyi;
    g.nodes = to_int(n.at("nodes"));
    g.p = n.num_or("p", g.p);
    g.gamma = int_field(n, "gamma", g.gamma);
    g.eta_min = n.num_or("eta_min", g.eta_min);
    g.eta_max = n.num_or("eta_max", g.eta_max);
    g.seed = n.uint_or("seed", g.seed);
    if (g.nodes < 1) n.at("nodes").fail("must be at least 1");
    if (!(g.p > 0.0 && g.p <= 1.0)) n.at("p").fail("must lie in (0, 1]");
    if (!(g.eta_min > 0.0 && g.eta_min <= g.eta_max)) n.fail("need 0 < eta_min <= eta_max");
    if (g.gamma < 1) n.at("gamma").fail("must be at least 1");
  } else {
    n.at("type").fail("unknown graph type '" + type + "'");
  }
  return g;
}

ArrivalProcess parse_process(const Node& n) {
  n.require_object();
  std::string type = n.at("type").str();
  if (type == "bernoulli") {
    n.only({"type", "rate"});
    double r = n.at("rate").num();
    if (!(r >= 0.0 && r <= 1.0)) n.at("rate").fail("must lie in [0, 1]");
    return BernoulliArrivals{r};
  }
  if (type == "poisson") {
    n.only({"type", "mean", "cap"});
    PoissonArrivals p;
    p.mean = n.at("mean").num();
    p.cap = int_field(n, "cap", p.cap);
    if (p.mean < 0.0) n.at("mean").fail("must be non-negative");
    if (p.cap < 0) n.at("cap").fail("must be non-negative");
    return p;
  }
  if (type == "ppbp") {
    n.only({"type", "burst_rate", "packet_rate", "burst_time", "hurst", "off_shape", "min_packets", "max_packets",
            "cap", "gaps", "rate"});
    PpbpArrivals p;
    p.burst_rate = n.num_or("burst_rate", p.burst_rate);
    p.packet_rate = n.num_or("packet_rate", p.packet_rate);
    p.burst_time = n.num_or("burst_time", p.burst_time);
    p.hurst = n.num_or("hurst", p.hurst);
    p.off_shape = n.num_or("off_shape", p.off_shape);
    p.min_packets = int_field(n, "min_packets", p.min_packets);
    p.max_packets = int_field(n, "max_packets", p.max_packets);
    p.cap = int_field(n, "cap", p.cap);
    std::string gaps = n.str_or("gaps", "poisson");
    if (gaps == "poisson") p.gaps = BurstGaps::Poisson;
    else if (gaps == "pareto") p.gaps = BurstGaps::Pareto;
    else n.at("gaps").fail("expected 'poisson' or 'pareto'");
    if (!(p.hurst > 0.5 && p.hurst < 1.0)) n.at("hurst").fail("must lie in (0.5, 1)");
    if (p.burst_rate < 0.0 || p.packet_rate < 0.0 || p.burst_time <= 0.0) n.fail("rates must be non-negative, burst_time positive");
    if (p.off_shape <= 1.0) n.at("off_shape").fail("must exceed 1");
    if (p.min_packets < 0 || p.max_packets < p.min_packets || p.cap < 0) n.fail("bad packet bounds");
    if (n.has("rate")) {
      double r = n.at("rate").num();
      if (r < 0.0) n.at("rate").fail("must be non-negative");
      p = p.with_rate(r);
    }
    return p;
  }
  n.at("type").fail("unknown arrival process '" + type + "'");
}

TrafficKind parse_kind(const Node& n) {
  return guarded(n, [&] { return traffic_kind_from_string(n.str()); });
}
Security parse_security(const Node& n) {
  return guarded(n, [&] { return security_from_string(n.str()); });
}

TrafficClass parse_class(const Node& n, int id) {
  n.only({"source", "kind", "destinations", "process", "security", "priority"});
  TrafficClass c;
  c.id = id;
  c.source = to_int(n.at("source"));
  c.kind = n.has("kind") ? parse_kind(n.at("kind")) : TrafficKind::Unicast;
  if (c.kind != TrafficKind::Broadcast) {
    Node d = n.at("destinations");
    d.require_array();
    for (std::size_t i = 0; i < d.size(); ++i) c.destinations.push_back(to_int(d.at(i)));
  } else if (n.has("destinations")) {
    n.at("destinations").fail("broadcast classes take no destinations");
  }
  c.arrival = parse_process(n.at("process"));
  if (n.has("security")) c.security = parse_security(n.at("security"));
  c.priority = int_field(n, "priority", 0);
  return c;
}

TrafficGenerator parse_generator(const Node& n) {
  n.only({"kind", "count", "seed", "group_size", "process", "variants"});
  TrafficGenerator g;
  g.kind = n.has("kind") ? parse_kind(n.at("kind")) : TrafficKind::Unicast;
  g.count = to_int(n.at("count"));
  if (g.count < 1) n.at("count").fail("must be at least 1");
  g.seed = n.uint_or("seed", g.seed);
  g.group_size = int_field(n, "group_size", g.group_size);
  if (g.group_size < 1) n.at("group_size").fail("must be at least 1");
  g.process = parse_process(n.at("process"));
  if (n.has("variants")) {
    Node v = n.at("variants");
    v.require_array();
    if (v.size() == 0) v.fail("must not be empty");
    g.variants.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      Node e = v.at(i);
      e.only({"security", "priority"});
      ClassVariant cv;
      if (e.has("security")) cv.security = parse_security(e.at("security"));
      cv.priority = int_field(e, "priority", 0);
      g.variants.push_back(cv);
    }
  }
  return g;
}

PolicyMode parse_policy(const Node& n) {
  n.require_object();
  std::string mode = n.at("mode").str();
  if (mode == "tqd") {
    n.only({"mode", "key_storage"});
    return TqdMode{n.bool_or("key_storage", true)};
  }
  if (mode == "single_queue") {
    n.only({"mode"});
    return SingleQueueMode{};
  }
  if (mode == "backpressure") {
    n.only({"mode", "key_cap"});
    int cap = int_field(n, "key_cap", 50);
    if (cap < 0) n.at("key_cap").fail("must be non-negative");
    return BackpressureMode{cap};
  }
  if (mode == "etqd") {
    n.only({"mode", "key_storage"});
    return EtqdMode{n.bool_or("key_storage", true)};
  }
  n.at("mode").fail("unknown policy '" + mode + "'");
}

KeyProcess parse_keys(const Node& n) {
  n.require_object();
  std::string type = n.at("type").str();
  if (type == "poisson") {
    n.only({"type", "cap"});
    PoissonKeys k;
    k.cap = int_field(n, "cap", k.cap);
    if (k.cap < 0) n.at("cap").fail("must be non-negative");
    return k;
  }
  if (type == "deterministic") {
    n.only({"type", "value"});
    int v = to_int(n.at("value"));
    if (v < 0) n.at("value").fail("must be non-negative");
    return DeterministicKeys{v};
  }
  if (type == "bb84") {
    n.only({"type", "photons", "eavesdrop_prob", "check_fraction", "cap"});
    Bb84Keys k;
    k.photons = int_field(n, "photons", k.photons);
    k.eavesdrop_prob = n.num_or("eavesdrop_prob", k.eavesdrop_prob);
    k.check_fraction = n.num_or("check_fraction", k.check_fraction);
    k.cap = int_field(n, "cap", k.cap);
    if (k.photons < 0) n.at("photons").fail("must be non-negative");
    if (!(k.eavesdrop_prob >= 0.0 && k.eavesdrop_prob <= 1.0)) n.at("eavesdrop_prob").fail("must lie in [0, 1]");
    if (!(k.check_fraction >= 0.0 && k.check_fraction <= 1.0)) n.at("check_fraction").fail("must lie in [0, 1]");
    return k;
  }
  n.at("type").fail("unknown key process '" + type + "'");
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
  Node root(j, "");
  root.only({"name", "graph", "traffic", "keys", "policies", "scheduler", "horizon", "seeds", "queue_capacity", "sweep",
             "stability", "output", "workers"});
  ExperimentConfig c;
  c.name = root.str_or("name", c.name);
  c.graph = parse_graph(root.at("graph"));

  Node traffic = root.at("traffic");
  traffic.only({"classes", "generate"});
  if (traffic.has("classes")) {
    Node cl = traffic.at("classes");
    cl.require_array();
    for (std::size_t i = 0; i < cl.size(); ++i) c.classes.push_back(parse_class(cl.at(i), static_cast<int>(i)));
  }
  if (traffic.has("generate")) {
    Node gen = traffic.at("generate");
    gen.require_array();
    for (std::size_t i = 0; i < gen.size(); ++i) c.generators.push_back(parse_generator(gen.at(i)));
  }
  if (c.classes.empty() && c.generators.empty()) traffic.fail("needs at least one class or generator");

  if (root.has("keys")) c.keys = parse_keys(root.at("keys"));

  Node pol = root.at("policies");
  pol.require_array();
  if (pol.size() == 0) pol.fail("must not be empty");
  for (std::size_t i = 0; i < pol.size(); ++i) c.policies.push_back(parse_policy(pol.at(i)));

  if (root.has("scheduler")) {
    Node s = root.at("scheduler");
    c.scheduler = guarded(s, [&] { return scheduler_from_string(s.str()); });
  }
  c.horizon = root.at("horizon").integer();
  if (c.horizon < 1) root.at("horizon").fail("must be at least 1");

  Node seeds = root.at("seeds");
  seeds.require_array();
  if (seeds.size() == 0) seeds.fail("must not be empty");
  c.seeds.clear();
  for (std::size_t i = 0; i < seeds.size(); ++i) c.seeds.push_back(seeds.at(i).uinteger());

  c.queue_capacity = root.int_or("queue_capacity", c.queue_capacity);
  if (c.queue_capacity < 1) root.at("queue_capacity").fail("must be at least 1");

  if (root.has("sweep")) {
    Node sw = root.at("sweep");
    sw.only({"rates"});
    Node r = sw.at("rates");
    r.require_array();
    if (r.size() == 0) r.fail("must not be empty");
    for (std::size_t i = 0; i < r.size(); ++i) {
      double v = r.at(i).num();
      if (v < 0.0) r.at(i).fail("must be non-negative");
      c.sweep_rates.push_back(v);
    }
  }
  if (root.has("stability")) {
    Node st = root.at("stability");
    st.only({"window", "slope_tol"});
    std::int64_t w = st.int_or("window", static_cast<std::int64_t>(c.stability_window));
    if (w < 2) st.at("window").fail("must be at least 2");
    c.stability_window = static_cast<std::size_t>(w);
    c.slope_tol = st.num_or("slope_tol", c.slope_tol);
    if (c.slope_tol <= 0.0) st.at("slope_tol").fail("must be positive");
  }
  if (root.has("output")) {
    Node o = root.at("output");
    o.only({"dir", "time_series", "series_stride", "drift_diagnostics"});
    c.output_dir = o.str_or("dir", c.output_dir);
    c.time_series = o.bool_or("time_series", c.time_series);
    c.series_stride = o.int_or("series_stride", c.series_stride);
    if (c.series_stride < 1) o.at("series_stride").fail("must be at least 1");
    c.drift_diagnostics = o.bool_or("drift_diagnostics", c.drift_diagnostics);
  }
  c.workers = int_field(root, "workers", c.workers);
  if (c.workers < 1) root.at("workers").fail("must be at least 1");
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("invalid JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json process_to_json(const ArrivalProcess& p) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, BernoulliArrivals>) {
          return {{"type", "bernoulli"}, {"rate", a.rate}};
        } else if constexpr (std::is_same_v<T, PoissonArrivals>) {
          return {{"type", "poisson"}, {"mean", a.mean}, {"cap", a.cap}};
        } else {
          return {{"type", "ppbp"},
                  {"burst_rate", a.burst_rate},
                  {"packet_rate", a.packet_rate},
                  {"burst_time", a.burst_time},
                  {"hurst", a.hurst},
                  {"off_shape", a.off_shape},
                  {"min_packets", a.min_packets},
                  {"max_packets", a.max_packets},
                  {"cap", a.cap},
                  {"gaps", a.gaps == BurstGaps::Pareto ? "pareto" : "poisson"}};
        }
      },
      p);
}

json policy_to_json(const PolicyMode& m) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, TqdMode>) return {{"mode", "tqd"}, {"key_storage", a.key_storage}};
        else if constexpr (std::is_same_v<T, SingleQueueMode>) return {{"mode", "single_queue"}};
        else if constexpr (std::is_same_v<T, BackpressureMode>) return {{"mode", "backpressure"}, {"key_cap", a.key_cap}};
        else return {{"mode", "etqd"}, {"key_storage", a.key_storage}};
      },
      m);
}

json keys_to_json(const KeyProcess& k) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PoissonKeys>) return {{"type", "poisson"}, {"cap", a.cap}};
        else if constexpr (std::is_same_v<T, DeterministicKeys>) return {{"type", "deterministic"}, {"value", a.value}};
        else
          return {{"type", "bb84"},
                  {"photons", a.photons},
                  {"eavesdrop_prob", a.eavesdrop_prob},
                  {"check_fraction", a.check_fraction},
                  {"cap", a.cap}};
      },
      k);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  json g;
  switch (c.graph.kind) {
    case GraphSource::Kind::Inline: {
      g["type"] = "inline";
      g["nodes"] = c.graph.nodes;
      json edges = json::array();
      for (const auto& e : c.graph.edges)
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"gamma", e.gamma},
                         {"eta", e.eta},
                         {"has_qkd", e.has_qkd},
                         {"directed", e.directed}});
      g["edges"] = edges;
      break;
    }
    case GraphSource::Kind::File:
      g["type"] = "file";
      g["path"] = c.graph.path;
      break;
    case GraphSource::Kind::ErdosRenyi:
      g = {{"type", "erdos_renyi"}, {"nodes", c.graph.nodes},     {"p", c.graph.p},   {"gamma", c.graph.gamma},
           {"eta_min", c.graph.eta_min}, {"eta_max", c.graph.eta_max}, {"seed", c.graph.seed}};
      break;
  }
  j["graph"] = g;

  json classes = json::array();
  for (const auto& cl : c.classes) {
    json o = {{"source", cl.source},
              {"kind", to_string(cl.kind)},
              {"process", process_to_json(cl.arrival)},
              {"security", to_string(cl.security)},
              {"priority", cl.priority}};
    if (cl.kind != TrafficKind::Broadcast) o["destinations"] = cl.destinations;
    classes.push_back(o);
  }
  json gens = json::array();
  for (const auto& gen : c.generators) {
    json vars = json::array();
    for (const auto& v : gen.variants) vars.push_back({{"security", to_string(v.security)}, {"priority", v.priority}});
    gens.push_back({{"kind", to_string(gen.kind)},
                    {"count", gen.count},
                    {"seed", gen.seed},
                    {"group_size", gen.group_size},
                    {"process", process_to_json(gen.process)},
                    {"variants", vars}});
  }
  j["traffic"] = {{"classes", classes}, {"generate", gens}};
  j["keys"] = keys_to_json(c.keys);
  json pols = json::array();
  for (const auto& p : c.policies) pols.push_back(policy_to_json(p));
  j["policies"] = pols;
  j["scheduler"] = to_string(c.scheduler);
  j["horizon"] = c.horizon;
  j["seeds"] = c.seeds;
  j["queue_capacity"] = c.queue_capacity;
  if (!c.sweep_rates.empty()) j["sweep"] = {{"rates", c.sweep_rates}};
  j["stability"] = {{"window", c.stability_window}, {"slope_tol", c.slope_tol}};
  j["output"] = {{"dir", c.output_dir},
                 {"time_series", c.time_series},
                 {"series_stride", c.series_stride},
                 {"drift_diagnostics", c.drift_diagnostics}};
  j["workers"] = c.workers;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  // Where and how many threads a run uses does not change its results.
  json j = config_to_json(c);
  j["output"].erase("dir");
  j.erase("workers");
  std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NetworkGraph materialize_graph(const ExperimentConfig& c, const std::string& base_dir) {
  try {
    switch (c.graph.kind) {
      case GraphSource::Kind::Inline:
        return build_graph(c.graph.nodes, c.graph.edges);
      case GraphSource::Kind::File: {
        std::filesystem::path p(c.graph.path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        return load_graph_file(p.string());
      }
      case GraphSource::Kind::ErdosRenyi:
        return erdos_renyi(c.graph.nodes, c.graph.p, c.graph.gamma, c.graph.eta_min, c.graph.eta_max, c.graph.seed);
    }
  } catch (const GraphError& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
  throw ConfigError("graph: unknown source");
}

namespace {

// Nodes reachable from s over the secured (QKD) edges.
std::vector<bool> secured_reach(const NetworkGraph& g, NodeId s) {
  std::vector<bool> seen(static_cast<std::size_t>(g.node_count()), false);
  std::vector<NodeId> stack{s};
  seen[static_cast<std::size_t>(s)] = true;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (EdgeId e : g.out_edges(u)) {
      const Edge& ed = g.edge(e);
      if (!ed.has_qkd || seen[static_cast<std::size_t>(ed.to)]) continue;
      seen[static_cast<std::size_t>(ed.to)] = true;
      stack.push_back(ed.to);
    }
  }
  return seen;
}

} // namespace

std::vector<TrafficClass> materialize_classes(const NetworkGraph& g, const ExperimentConfig& c) {
  std::vector<TrafficClass> out = c.classes;
  const int n = g.node_count();
  for (std::size_t gi = 0; gi < c.generators.size(); ++gi) {
    const TrafficGenerator& gen = c.generators[gi];
    Rng rng(derive_seed(gen.seed, 0x3000 + gi));
    for (int k = 0; k < gen.count; ++k) {
      TrafficClass base;
      base.kind = gen.kind;
      base.arrival = gen.process;
      bool found = false;
      for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
        base.source = static_cast<NodeId>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        auto reach = secured_reach(g, base.source);
        std::vector<NodeId> cands;
        for (NodeId v = 0; v < n; ++v)
          if (v != base.source && reach[static_cast<std::size_t>(v)]) cands.push_back(v);
        base.destinations.clear();
        if (gen.kind == TrafficKind::Broadcast) {
          found = static_cast<int>(cands.size()) == n - 1 && n > 1;
          continue;
        }
        int need = gen.kind == TrafficKind::Unicast ? 1 : gen.group_size;
        if (static_cast<int>(cands.size()) < need) continue;
        for (int d = 0; d < need; ++d) {
          std::size_t pick = d + uniform_index(rng, cands.size() - static_cast<std::size_t>(d));
          std::swap(cands[static_cast<std::size_t>(d)], cands[pick]);
          base.destinations.push_back(cands[static_cast<std::size_t>(d)]);
        }
        std::sort(base.destinations.begin(), base.destinations.end());
        found = true;
      }
      if (!found)
        throw ConfigError("traffic.generate[" + std::to_string(gi) + "]: no source reaches enough destinations");
      for (const auto& v : gen.variants) {
        TrafficClass cl = base;
        cl.security = v.security;
        cl.priority = v.priority;
        out.push_back(cl);
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

std::vector<std::string> preset_names() {
  return {"counterexample", "unicast-sweep", "residual-keys", "broadcast-sweep", "etqd-mixed", "full-scale"};
}

namespace {

GraphSource desk_graph() {
  GraphSource g;
  g.kind = GraphSource::Kind::ErdosRenyi;
  g.nodes = 20;
  g.p = 0.3;
  g.gamma = 1;
  g.eta_min = 0.2;
  g.eta_max = 1.0;
  g.seed = 11;
  return g;
}

} // namespace

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.horizon = 100000;
  c.seeds = {1};
  c.keys = PoissonKeys{1.0, 20};
  if (name == "counterexample") {
    c.graph.kind = GraphSource::Kind::Inline;
    c.graph.nodes = 2;
    c.graph.edges = {EdgeSpec{0, 1, 1, 0.5, true, true}};
    TrafficClass cl;
    cl.source = 0;
    cl.destinations = {1};
    cl.arrival = BernoulliArrivals{0.45};
    c.classes = {cl};
    c.policies = {SingleQueueMode{}, TqdMode{true}, TqdMode{false}};
    c.output_dir = "out/counterexample";
    return c;
  }
  if (name == "unicast-sweep" || name == "residual-keys") {
    c.graph = desk_graph();
    TrafficGenerator gen;
    gen.kind = TrafficKind::Unicast;
    gen.count = 5;
    gen.seed = 5;
    gen.process = BernoulliArrivals{0.05};
    c.generators = {gen};
    c.policies = {TqdMode{true}, TqdMode{false}, BackpressureMode{50}};
    c.sweep_rates = name == "unicast-sweep" ? std::vector<double>{0.02, 0.05, 0.08, 0.11, 0.14}
                                            : std::vector<double>{0.05, 0.1};
    if (name == "residual-keys") c.policies = {TqdMode{true}, BackpressureMode{50}};
    c.time_series = false;
    c.output_dir = "out/" + name;
    return c;
  }
  if (name == "broadcast-sweep") {
    c.graph = desk_graph();
    TrafficGenerator gen;
    gen.kind = TrafficKind::Broadcast;
    gen.count = 2;
    gen.seed = 7;
    gen.process = BernoulliArrivals{0.02};
    c.generators = {gen};
    c.policies = {TqdMode{true}, TqdMode{false}};
    c.sweep_rates = {0.01, 0.02, 0.04, 0.06};
    c.time_series = false;
    c.output_dir = "out/broadcast-sweep";
    return c;
  }
  if (name == "etqd-mixed") {
    c.graph = desk_graph();
    TrafficGenerator gen;
    gen.kind = TrafficKind::Unicast;
    gen.count = 3;
    gen.seed = 9;
    gen.process = BernoulliArrivals{0.05};
    gen.variants = {ClassVariant{Security::Classical, 0}, ClassVariant{Security::Quantum, 1},
                    ClassVariant{Security::Quantum, 0}};
    c.generators = {gen};
    c.policies = {EtqdMode{true}};
    c.sweep_rates = {0.03, 0.06, 0.09};
    c.time_series = false;
    c.output_dir = "out/etqd-mixed";
    return c;
  }
  if (name == "full-scale") {
    c.graph = desk_graph();
    c.graph.nodes = 150;
    c.graph.p = 0.05;
    TrafficGenerator gen;
    gen.kind = TrafficKind::Unicast;
    gen.count = 20;
    gen.seed = 5;
    gen.process = BernoulliArrivals{0.05};
    c.generators = {gen};
    c.policies = {TqdMode{true}, TqdMode{false}, BackpressureMode{50}};
    c.sweep_rates = {0.02, 0.05, 0.08};
    c.time_series = false;
    c.workers = 4;
    c.output_dir = "out/full-scale";
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

} // namespace qkd
