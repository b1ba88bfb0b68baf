#include "qkd/metrics_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qkd {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json metrics_to_json(const MetricsRecord& m) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) -> json { return v ? json(*v) : json(nullptr); };
  json classes = json::array();
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    const auto& cm = m.classes[c];
    classes.push_back({{"class", c},
                       {"arrivals", cm.arrivals},
                       {"delivered", cm.delivered},
                       {"dropped", cm.dropped},
                       {"delivered_rate", m.delivered_rate(static_cast<int>(c))},
                       {"mean_delay", opt(cm.mean_delay())}});
  }
  return {{"policy", m.policy},
          {"seed", m.seed},
          {"horizon", m.horizon},
          {"arrivals", m.arrivals},
          {"delivered", m.delivered},
          {"dropped", m.dropped},
          {"in_flight", m.in_flight},
          {"mean_delay", opt(m.mean_delay())},
          {"mean_residual_keys", m.mean_residual_keys},
          {"mean_backlog", m.mean_backlog},
          {"mean_virtual_sum", m.mean_virtual_sum},
          {"keys_generated", m.keys_generated},
          {"keys_consumed", m.keys_consumed},
          {"keys_discarded", m.keys_discarded},
          {"drift_bound_B", m.drift_bound_B},
          {"classes", classes}};
}

std::string series_to_csv(const MetricsRecord& m) {
  std::ostringstream out;
  out << "slot,arrivals,delivered,dropped,backlog_x,backlog_y,virtual_sum,residual_keys,in_flight,lyapunov,drift\n";
  for (const auto& s : m.series) {
    out << s.slot << ',' << s.arrivals << ',' << s.delivered << ',' << s.dropped << ',' << s.backlog_x << ','
        << s.backlog_y << ',' << format_number(s.virtual_sum) << ',' << s.residual_keys << ',' << s.in_flight << ','
        << format_number(s.lyapunov) << ',' << format_number(s.drift) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace qkd
