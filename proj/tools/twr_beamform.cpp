// Command-line front end: runs a seeded Monte Carlo sweep over the configured
// relay designs and writes one CSV row per (method, sweep point).
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twr/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-way relay amplification-matrix experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte Carlo sweep and write a CSV");
  std::string preset, config_path, out_path = "results.csv";
  std::int64_t trials = -1, seed = -1;
  bool full_scale = false;
  run->add_option("--preset", preset, "Canned experiment shape")
      ->check(CLI::IsMember(twr::preset_names()));
  run->add_option("--config", config_path, "Flat key=value config file");
  run->add_option("--trials", trials, "Override the trial count");
  run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--out", out_path, "Output CSV path");
  run->add_flag("--full", full_scale, "Run presets at full scale (64 relay antennas)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  twr::ExperimentConfig config;
  try {
    if (!preset.empty()) twr::apply_preset(config, preset, full_scale);
    if (!config_path.empty()) twr::apply_config_file(config, config_path);
    if (trials >= 0) config.trials = static_cast<int>(trials);
    if (seed >= 0) config.base_seed = static_cast<std::uint64_t>(seed);
    twr::validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const std::vector<twr::SweepRow> rows = twr::run_sweep(config);
    twr::emit_csv(rows, out_path);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
