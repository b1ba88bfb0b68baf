#include "qkd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qkd/metrics_io.hpp"

namespace qkd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string rate_label(std::optional<double> rate) { return rate ? format_number(*rate) : "base"; }

namespace {

struct Cell {
  std::size_t policy = 0;
  std::optional<double> rate;
  std::uint64_t seed = 0;
};

struct CellOutput {
  MetricsRecord record; // series dropped after writing
  std::optional<StabilityVerdict> stability;
};

std::string cell_stem(const std::string& policy, std::optional<double> rate, std::uint64_t seed,
                      const std::string& hash) {
  return policy + "_r" + rate_label(rate) + "_s" + std::to_string(seed) + "_" + hash.substr(0, 8);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw RunError("cannot create output directory '" + dir.string() + "'");
  fs::path probe = dir / ".write-probe";
  try {
    write_text_file(probe.string(), "");
  } catch (const std::exception&) {
    throw RunError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

double total_delivered_rate(const RunSummary& s) {
  double r = 0.0;
  for (const auto& c : s.classes) r += c.delivered_rate.mean;
  return r;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig effective = input; // what determines the results
  if (options.seed) effective.seeds = {*options.seed};
  ExperimentConfig config = effective;
  if (options.output_dir) config.output_dir = *options.output_dir;
  if (options.workers) config.workers = *options.workers;
  if (config.workers < 1) throw ConfigError("workers: must be at least 1");

  const NetworkGraph g = materialize_graph(config, options.base_dir);
  const std::vector<TrafficClass> base_classes = materialize_classes(g, config);
  const std::string hash = config_hash(config);

  // Validate every policy before touching the file system.
  for (const auto& mode : config.policies) {
    SimulationConfig sc;
    sc.classes = base_classes;
    sc.mode = mode;
    try {
      check_simulation_inputs(g, sc);
    } catch (const std::exception& e) {
      throw ConfigError("policy " + policy_label(mode) + ": " + e.what());
    }
  }

  const fs::path out(config.output_dir);
  ensure_dir(out);

  std::vector<std::optional<double>> rates;
  if (config.sweep_rates.empty()) rates.push_back(std::nullopt);
  for (double r : config.sweep_rates) rates.push_back(r);

  std::vector<Cell> cells;
  for (std::size_t p = 0; p < config.policies.size(); ++p)
    for (const auto& r : rates)
      for (std::uint64_t s : config.seeds) cells.push_back({p, r, s});

  std::vector<CellOutput> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const Cell& cell = cells[i];
        SimulationConfig sc;
        sc.classes = base_classes;
        if (cell.rate)
          for (auto& c : sc.classes) c.arrival = with_rate(c.arrival, *cell.rate);
        sc.mode = config.policies[cell.policy];
        sc.scheduler = config.scheduler;
        sc.horizon = config.horizon;
        sc.seed = cell.seed;
        sc.keys = config.keys;
        sc.queue_capacity = config.queue_capacity;
        sc.record_series = config.time_series;
        sc.series_stride = config.series_stride;
        sc.drift_diagnostics = config.drift_diagnostics;
        MetricsRecord rec = simulate(g, sc);

        CellOutput co;
        if (config.time_series && config.series_stride == 1 && rec.series.size() >= 2 * config.stability_window) {
          std::vector<double> backlog;
          backlog.reserve(rec.series.size());
          for (const auto& s : rec.series) backlog.push_back(static_cast<double>(s.backlog_x + s.backlog_y));
          co.stability = stability_test(backlog, config.stability_window, config.slope_tol);
        }
        const std::string stem = cell_stem(rec.policy, cell.rate, cell.seed, hash);
        json j = metrics_to_json(rec);
        j["rate"] = rate_label(cell.rate);
        j["config_hash"] = hash;
        if (co.stability)
          j["stability"] = {{"verdict", to_string(co.stability->verdict)},
                            {"slope", co.stability->slope},
                            {"time_average", co.stability->time_average}};
        else
          j["stability"] = nullptr;
        write_text_file((out / (stem + ".json")).string(), j.dump(2) + "\n");
        if (config.time_series) write_text_file((out / (stem + ".csv")).string(), series_to_csv(rec));
        rec.series.clear();
        rec.series.shrink_to_fit();
        co.record = std::move(rec);
        results[i] = std::move(co);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), cells.size());
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunResult result;
  result.output_dir = out.string();
  result.config_hash = hash;
  for (const auto& cell : cells) {
    const std::string stem = cell_stem(policy_label(config.policies[cell.policy]), cell.rate, cell.seed, hash);
    result.files.push_back(stem + ".json");
    if (config.time_series) result.files.push_back(stem + ".csv");
  }

  std::ostringstream csv;
  csv << "policy,rate,seeds,mean_delay,mean_delay_stderr,delivered_rate,mean_residual_keys,mean_backlog,"
         "arrivals,delivered,dropped,in_flight,conserved,stable,unstable,inconclusive\n";
  json agg_cells = json::array();
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    for (const auto& r : rates) {
      std::vector<MetricsRecord> recs;
      CellSummary cs;
      cs.policy = policy_label(config.policies[p]);
      cs.rate = rate_label(r);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].policy != p || cells[i].rate != r) continue;
        recs.push_back(results[i].record);
        const auto& st = results[i].stability;
        if (!st || st->verdict == Stability::Inconclusive) ++cs.inconclusive;
        else if (st->verdict == Stability::Stable) ++cs.stable;
        else ++cs.unstable;
      }
      cs.summary = summarize(recs);
      const RunSummary& s = cs.summary;
      csv << cs.policy << ',' << cs.rate << ',' << s.seeds << ','
          << (s.mean_delay ? format_number(s.mean_delay->mean) : "") << ','
          << (s.mean_delay ? format_number(s.mean_delay->stderr_) : "") << ','
          << format_number(total_delivered_rate(s)) << ',' << format_number(s.mean_residual_keys.mean) << ','
          << format_number(s.mean_backlog.mean) << ',' << s.arrivals << ',' << s.delivered << ',' << s.dropped << ','
          << s.in_flight << ',' << (s.conserved ? 1 : 0) << ',' << cs.stable << ',' << cs.unstable << ','
          << cs.inconclusive << '\n';
      json cj = summary_to_json(s);
      cj["rate"] = cs.rate;
      cj["delivered_rate"] = total_delivered_rate(s);
      cj["stability"] = {{"stable", cs.stable}, {"unstable", cs.unstable}, {"inconclusive", cs.inconclusive}};
      agg_cells.push_back(cj);
      result.cells.push_back(std::move(cs));
    }
  }
  std::vector<std::string> rate_axis;
  for (const auto& r : rates) rate_axis.push_back(rate_label(r));

  write_text_file((out / "summary.csv").string(), csv.str());
  json agg = {{"name", config.name},
              {"config_hash", hash},
              {"sweep", rate_axis},
              {"policies", json::array()},
              {"cells", agg_cells}};
  for (const auto& m : config.policies) agg["policies"].push_back(policy_label(m));
  write_text_file((out / "aggregate.json").string(), agg.dump(2) + "\n");
  write_text_file((out / "config.json").string(), config_to_json(effective).dump(2) + "\n");
  result.files.push_back("summary.csv");
  result.files.push_back("aggregate.json");
  result.files.push_back("config.json");

  json manifest = {{"name", config.name}, {"config_hash", hash}, {"files", result.files}};
  write_text_file((out / "manifest.json").string(), manifest.dump(2) + "\n");
  return result;
}

std::string compare_runs(const std::vector<std::string>& dirs) {
  if (dirs.size() < 2) throw RunError("compare needs at least two run directories");

  struct Row {
    std::optional<double> delay;
    double rate = 0.0;
    double residual = 0.0;
  };
  struct Series {
    std::string label;
    std::map<std::string, Row> by_rate;
  };
  std::vector<Series> series;
  std::vector<std::string> axis;

  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const fs::path path = fs::path(dirs[d]) / "aggregate.json";
    json agg;
    try {
      agg = json::parse(read_text_file(path.string()));
    } catch (const std::exception& e) {
      throw RunError("cannot read '" + path.string() + "': " + e.what());
    }
    std::vector<std::string> this_axis = agg.at("sweep").get<std::vector<std::string>>();
    if (d == 0) {
      axis = this_axis;
    } else {
      std::set<std::string> a(axis.begin(), axis.end()), b(this_axis.begin(), this_axis.end());
      if (a != b) throw RunError("mismatched sweep axes between '" + dirs[0] + "' and '" + dirs[d] + "'");
    }
    std::map<std::string, std::size_t> index;
    for (const auto& c : agg.at("cells")) {
      const std::string policy = c.at("policy").get<std::string>();
      auto [it, fresh] = index.try_emplace(policy, series.size());
      if (fresh) series.push_back({"run" + std::to_string(d) + ":" + policy, {}});
      Row row;
      if (!c.at("mean_delay").is_null()) row.delay = c.at("mean_delay").at("mean").get<double>();
      row.rate = c.at("delivered_rate").get<double>();
      row.residual = c.at("mean_residual_keys").at("mean").get<double>();
      series[it->second].by_rate[c.at("rate").get<std::string>()] = row;
    }
  }

  std::ostringstream csv;
  csv << "rate";
  for (const auto& s : series)
    csv << ',' << s.label << ":mean_delay," << s.label << ":delivered_rate," << s.label << ":mean_residual_keys";
  for (std::size_t i = 1; i < series.size(); ++i)
    csv << ",delay_diff:" << series[i].label << ",rate_diff:" << series[i].label << ",ref_delay_le:"
        << series[i].label;
  csv << '\n';

  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : axis) {
    csv << r;
    for (const auto& s : series) {
      const Row& row = s.by_rate.at(r);
      csv << ',' << opt(row.delay) << ',' << format_number(row.rate) << ',' << format_number(row.residual);
    }
    const Row& ref = series[0].by_rate.at(r);
    for (std::size_t i = 1; i < series.size(); ++i) {
      const Row& row = series[i].by_rate.at(r);
      std::optional<double> diff;
      if (row.delay && ref.delay) diff = *row.delay - *ref.delay;
      csv << ',' << opt(diff) << ',' << format_number(row.rate - ref.rate) << ','
          << (diff ? (*ref.delay <= *row.delay ? "1" : "0") : "");
    }
    csv << '\n';
  }
  return csv.str();
}

} // namespace qkd
