#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkd/config.hpp"
#include "qkd/metrics_io.hpp"
#include "qkd/runner.hpp"

namespace {

int report(const qkd::RunResult& r) {
  std::cout << "wrote " << r.files.size() + 1 << " files to " << r.output_dir << " (config " << r.config_hash
            << ")\n";
  for (const auto& c : r.cells) {
    std::cout << "  " << c.policy << " rate=" << c.rate << " delay=";
    if (c.summary.mean_delay) std::cout << qkd::format_number(c.summary.mean_delay->mean);
    else std::cout << "-";
    std::cout << " residual_keys=" << qkd::format_number(c.summary.mean_residual_keys.mean)
              << " stable=" << c.stable << " unstable=" << c.unstable << '\n';
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slotted simulator for secure routing over QKD networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset, compare_out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::vector<std::string> dirs;

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("-c,--config", config_path, "Config file")->required();
  run->add_option("-s,--seed", seed, "Replace the seed list with one seed");
  run->add_option("-o,--out", out_dir, "Output directory");
  run->add_option("-w,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* pre = app.add_subcommand("preset", "Run a built-in experiment");
  pre->add_option("name", preset, "Preset name")->required();
  pre->add_option("-s,--seed", seed, "Replace the seed list with one seed");
  pre->add_option("-o,--out", out_dir, "Output directory");
  pre->add_option("-w,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* show = app.add_subcommand("show", "Print a preset as a JSON config");
  show->add_option("name", preset, "Preset name")->required();

  app.add_subcommand("list", "List presets");

  auto* cmp = app.add_subcommand("compare", "Join completed runs by sweep value");
  cmp->add_option("dirs", dirs, "Run directories")->required()->expected(2, -1);
  cmp->add_option("-o,--out", compare_out, "Write the CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    qkd::RunOptions opts;
    if (!out_dir.empty()) opts.output_dir = out_dir;
    opts.seed = seed;
    opts.workers = workers;

    if (*run) {
      qkd::ExperimentConfig c = qkd::load_config_file(config_path);
      opts.base_dir = std::filesystem::path(config_path).parent_path().string();
      if (opts.base_dir.empty()) opts.base_dir = ".";
      return report(qkd::run_experiment(c, opts));
    }
    if (*pre) return report(qkd::run_experiment(qkd::preset_config(preset), opts));
    if (*show) {
      std::cout << qkd::config_to_json(qkd::preset_config(preset)).dump(2) << '\n';
      return 0;
    }
    if (app.got_subcommand("list")) {
      for (const auto& n : qkd::preset_names()) std::cout << n << '\n';
      return 0;
    }
    if (*cmp) {
      std::string csv = qkd::compare_runs(dirs);
      if (compare_out.empty()) std::cout << csv;
      else qkd::write_text_file(compare_out, csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
