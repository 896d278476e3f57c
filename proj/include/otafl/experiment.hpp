#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otafl/config.hpp"
#include "otafl/orchestrator.hpp"

namespace otafl {

/// Runs `config` and writes config.txt, geometry.json, records.jsonl,
/// summary.csv and diagnostics.json into `dir` (created if needed).
RunResult run_to_directory(const SimConfig& config, const std::filesystem::path& dir);

/// Keys accepted as a sweep axis.
std::vector<std::string> sweepable_keys();

struct SweepRun {
  std::string value;
  std::filesystem::path dir;
  RunResult result;
};

/// One run per value in `<out>/<axis>=<value>/`, plus `<out>/sweep.csv`.
/// Every run shares the base seed. Throws ConfigError on an unknown axis.
std::vector<SweepRun> sweep(const SimConfig& base, const std::string& axis,
                            const std::vector<std::string>& values,
                            const std::filesystem::path& out);

/// First record whose accuracy reaches `target`.
std::optional<std::size_t> first_reaching(const std::vector<RoundRecord>& records, double target);

struct ReportRow {
  std::string run;
  std::optional<int> rounds_to_target;
  std::optional<double> energy_to_target;
  double mean_participation = 0.0;
  std::optional<double> final_accuracy;
};

struct Report {
  std::size_t rounds = 0;  // aligned length
  std::vector<std::string> warnings;
  std::vector<ReportRow> rows;
};

/// Loads each directory's records.jsonl, truncates to the shortest run and
/// prints the per-round and energy-to-target tables to `text`. When `csv` is
/// given, the per-round table is also written there.
Report report(const std::vector<std::filesystem::path>& dirs, double accuracy_target,
              std::ostream& text, const std::optional<std::filesystem::path>& csv = std::nullopt);

}  // namespace otafl
