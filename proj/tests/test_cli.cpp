#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "qkd/config.hpp"
#include "qkd/metrics_io.hpp"
#include "qkd/runner.hpp"

using namespace qkd;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "name": "small",
  "graph": {"type": "inline", "nodes": 3,
            "edges": [{"from": 0, "to": 1, "eta": 0.6}, {"from": 1, "to": 2, "eta": 0.6}]},
  "traffic": {"classes": [{"source": 0, "kind": "unicast", "destinations": [2],
                           "process": {"type": "bernoulli", "rate": 0.2}}]},
  "policies": [{"mode": "tqd", "key_storage": true}, {"mode": "tqd", "key_storage": false}],
  "horizon": 3000,
  "seeds": [1, 2],
  "sweep": {"rates": [0.1, 0.2]},
  "output": {"dir": "unused", "time_series": true, "series_stride": 10}
})";

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("qkd_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST_CASE("config round trip for every preset and a hand-written config") {
  for (const auto& name : preset_names()) {
    auto c = preset_config(name);
    auto again = parse_config(config_to_json(c).dump());
    CHECK(again == c);
    CHECK(config_to_json(again) == config_to_json(c));
  }
  auto c = parse_config(kSmall);
  CHECK(parse_config(config_to_json(c).dump(2)) == c);
  CHECK(c.policies.size() == 2);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("ppbp and bb84 round trip") {
  auto c = preset_config("etqd-mixed");
  PpbpArrivals p;
  p.gaps = BurstGaps::Pareto;
  c.generators[0].process = p;
  c.keys = Bb84Keys{16, 0.1, 0.25, 9};
  c.scheduler = Scheduler::Ento;
  CHECK(parse_config(config_to_json(c).dump()) == c);
}

TEST_CASE("diagnostics name the field or the text position") {
  auto no_horizon = nlohmann::json::parse(kSmall);
  no_horizon.erase("horizon");
  CHECK(error_of(no_horizon.dump()) == "horizon: missing required field");
  auto msg = error_of("{\n  \"horizon\": 10,\n  \"seeds\": [1,]\n}");
  CHECK(msg.find("line 3") != std::string::npos);
  auto bad_source = nlohmann::json::parse(kSmall);
  bad_source["traffic"]["classes"][0].erase("source");
  CHECK(error_of(bad_source.dump()).find("traffic.classes[0].source") != std::string::npos);
  auto bad_type = nlohmann::json::parse(kSmall);
  bad_type["policies"][1]["key_storage"] = "yes";
  CHECK(error_of(bad_type.dump()).find("policies[1].key_storage: expected a boolean") != std::string::npos);
  auto unknown = nlohmann::json::parse(kSmall);
  unknown["output"]["colour"] = 1;
  CHECK(error_of(unknown.dump()).find("output.colour: unknown field") != std::string::npos);
  CHECK_THROWS_AS(preset_config("nope"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent.json"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  auto c = parse_config(kSmall);
  CHECK(config_hash(c) == config_hash(parse_config(kSmall)));
  CHECK(config_hash(c).size() == 16);
  c.output_dir = "elsewhere";
  c.workers = 3;
  CHECK(config_hash(c) == config_hash(parse_config(kSmall)));
  c.horizon += 1;
  CHECK(config_hash(c) != config_hash(parse_config(kSmall)));
}

TEST_CASE("generated classes share endpoints across variants") {
  auto c = preset_config("etqd-mixed");
  auto g = materialize_graph(c);
  auto cls = materialize_classes(g, c);
  REQUIRE(cls.size() == 9);
  for (std::size_t i = 0; i < cls.size(); i += 3) {
    CHECK(cls[i].source == cls[i + 1].source);
    CHECK(cls[i].destinations == cls[i + 2].destinations);
    CHECK(cls[i].security == Security::Classical);
    CHECK(cls[i + 1].priority > cls[i + 2].priority);
  }
  for (std::size_t i = 0; i < cls.size(); ++i) CHECK(cls[i].id == static_cast<int>(i));
}

TEST_CASE("run writes exactly the files in the manifest") {
  auto dir = fresh_dir("manifest");
  auto c = parse_config(kSmall);
  auto r = run_experiment(c, RunOptions{dir.string(), std::nullopt, 2, "."});
  auto manifest = nlohmann::json::parse(read_text_file((dir / "manifest.json").string()));
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f.get<std::string>());
  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
  CHECK(listed == present);
  CHECK(listed.size() == 2 * 2 * 2 * 2 + 3);
  CHECK(manifest["config_hash"] == r.config_hash);
  CHECK(r.cells.size() == 4);
  for (const auto& cell : r.cells) CHECK(cell.summary.conserved);
}

TEST_CASE("seed override and unwritable output") {
  auto dir = fresh_dir("seed");
  auto c = parse_config(kSmall);
  auto r = run_experiment(c, RunOptions{dir.string(), std::uint64_t{7}, 1, "."});
  CHECK(r.cells.front().summary.seeds == 1);
  CHECK_THROWS_AS(run_experiment(c, RunOptions{std::string("/proc/qkd_no_such_dir"), std::nullopt, 1, "."}),
                  RunError);
}

TEST_CASE("compare joins runs by sweep value") {
  auto c = parse_config(kSmall);
  c.time_series = false;
  auto storage = c, nostorage = c;
  storage.policies = {TqdMode{true}};
  nostorage.policies = {TqdMode{false}};
  auto d1 = fresh_dir("cmp1"), d2 = fresh_dir("cmp2"), d3 = fresh_dir("cmp3"), d4 = fresh_dir("cmp4");
  run_experiment(storage, RunOptions{d1.string(), std::nullopt, 1, "."});
  run_experiment(storage, RunOptions{d2.string(), std::nullopt, 1, "."});
  run_experiment(nostorage, RunOptions{d3.string(), std::nullopt, 1, "."});

  auto same = compare_runs({d1.string(), d2.string()});
  std::istringstream in(same);
  std::string header, row;
  std::getline(in, header);
  CHECK(header.find("delay_diff:run1:tqd-storage") != std::string::npos);
  int rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    CHECK(row.find(",0,0,1") != std::string::npos); // zero diffs, flag set
  }
  CHECK(rows == 2);

  auto versus = compare_runs({d1.string(), d3.string()});
  std::istringstream vin(versus);
  std::getline(vin, header);
  while (std::getline(vin, row)) CHECK(row.substr(row.size() - 2) == ",1");

  auto other = c;
  other.sweep_rates = {0.3};
  run_experiment(other, RunOptions{d4.string(), std::nullopt, 1, "."});
  CHECK_THROWS_AS(compare_runs({d1.string(), d4.string()}), RunError);
  CHECK_THROWS_AS(compare_runs({d1.string()}), RunError);
}
