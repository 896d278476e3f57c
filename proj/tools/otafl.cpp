// otafl: run, sweep and compare over-the-air FL simulations.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "otafl/config.hpp"
#include "otafl/error.hpp"
#include "otafl/experiment.hpp"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  long long seed = -1;
  int workers = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value config file");
  cmd->add_option("--set", c.sets, "override one field, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "root seed");
  cmd->add_option("--workers", c.workers, "worker threads");
  cmd->add_option("--out", c.out, "output directory")->required();
}

otafl::SimConfig load(const Common& c) {
  auto overrides = c.sets;
  if (c.seed >= 0) overrides.push_back("seed=" + std::to_string(c.seed));
  if (c.workers > 0) overrides.push_back("workers=" + std::to_string(c.workers));
  overrides.push_back("out_dir=" + c.out);
  return otafl::parse_config(c.config_path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"over-the-air federated learning with RF energy harvesting"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run_cmd = app.add_subcommand("run", "one simulation");
  add_common(run_cmd, run_opts);

  Common sweep_opts;
  std::string axis;
  std::vector<std::string> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per value of a config field");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", axis, "config key to vary")->required();
  sweep_cmd->add_option("--values", values, "values, comma separated or repeated")
      ->required()
      ->delimiter(',');

  std::vector<std::string> dirs;
  double target = 0.8;
  std::string csv;
  auto* report_cmd = app.add_subcommand("report", "compare finished runs");
  report_cmd->add_option("dirs", dirs, "run directories")->required();
  report_cmd->add_option("--target", target, "accuracy target for the energy table");
  report_cmd->add_option("--csv", csv, "also write the per-round table as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto config = load(run_opts);
      std::cout << otafl::emit_config(config);
      const auto result = otafl::run_to_directory(config, run_opts.out);
      const auto& last = result.records.empty() ? nullptr : &result.records.back();
      std::printf("rounds %zu", result.records.size());
      if (last && last->test_accuracy) std::printf("  final accuracy %.4f", *last->test_accuracy);
      if (last) std::printf("  cumulative energy %.6g J", last->cumulative_energy);
      std::printf("\nwrote %s\n", run_opts.out.c_str());
    } else if (*sweep_cmd) {
      const auto base = load(sweep_opts);
      std::cout << otafl::emit_config(base);
      for (const auto& r : otafl::sweep(base, axis, values, sweep_opts.out)) {
        const auto& recs = r.result.records;
        std::printf("%s=%s", axis.c_str(), r.value.c_str());
        if (!recs.empty() && recs.back().test_accuracy) {
          std::printf("  final accuracy %.4f", *recs.back().test_accuracy);
        }
        std::printf("  -> %s\n", r.dir.string().c_str());
      }
    } else if (*report_cmd) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      std::optional<std::filesystem::path> csv_path;
      if (!csv.empty()) csv_path = csv;
      otafl::report(paths, target, std::cout, csv_path);
    }
  } catch (const otafl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
