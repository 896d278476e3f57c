#include "otafl/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "otafl/error.hpp"
#include "otafl/metrics_io.hpp"

namespace fs = std::filesystem;

namespace otafl {

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out: cannot write " + path.string());
  return out;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

std::string points_json(const std::vector<Point>& pts) {
  std::string out = "[";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ',';
    out += '[' + format_double(pts[i].x) + ',' + format_double(pts[i].y) + ']';
  }
  return out + ']';
}

void write_geometry(const SimConfig& config, const fs::path& path) {
  const auto g = build_geometry(config.placement(), substream(config.seed, {StreamKind::Geometry}));
  open_out(path) << "{\"devices\": " << points_json(g.device_pos)
                 << ",\n \"inband\": " << points_json(g.inband_pos)
                 << ",\n \"outband\": " << points_json(g.outband_pos) << "}\n";
}

}  // namespace

RunResult run_to_directory(const SimConfig& config, const fs::path& dir) {
  validate(config);
  fs::create_directories(dir);
  open_out(dir / "config.txt") << emit_config(config);
  write_geometry(config, dir / "geometry.json");

  auto jsonl = open_out(dir / "records.jsonl");
  auto result = run(config, [&](const RoundRecord& r) { jsonl << record_to_json(r) << '\n'; });
  jsonl.close();

  auto csv = open_out(dir / "summary.csv");
  write_summary_csv(csv, result.records);
  open_out(dir / "diagnostics.json")
      << (result.diagnostics ? diagnostics_to_json(*result.diagnostics) : std::string("null\n"));
  return result;
}

std::vector<std::string> sweepable_keys() {
  std::vector<std::string> keys;
  for (const auto& k : config_keys()) {
    if (k != "out_dir" && k != "workers") keys.push_back(k);
  }
  return keys;
}

std::vector<SweepRun> sweep(const SimConfig& base, const std::string& axis,
                            const std::vector<std::string>& values, const fs::path& out) {
  const auto keys = sweepable_keys();
  if (std::find(keys.begin(), keys.end(), axis) == keys.end()) {
    std::string list;
    for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("sweep axis '" + axis + "' is not sweepable; choose one of: " + list);
  }
  if (values.empty()) throw ConfigError("sweep: no values given for '" + axis + "'");

  // Validate every point before running any of them.
  std::vector<SimConfig> configs;
  for (const auto& v : values) {
    SimConfig c = base;
    apply_setting(c, axis, v);
    validate(c);
    configs.push_back(std::move(c));
  }

  std::vector<SweepRun> runs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::string name = axis + "=" + values[i];
    std::replace_if(name.begin(), name.end(), [](char ch) { return ch == ' ' || ch == '/'; }, '_');
    const fs::path dir = out / name;
    configs[i].out_dir = dir.string();
    runs.push_back({values[i], dir, run_to_directory(configs[i], dir)});
  }

  auto merged = open_out(out / "sweep.csv");
  merged << axis << ',' << summary_csv_header() << '\n';
  for (const auto& r : runs) {
    for (const auto& rec : r.result.records) merged << '"' << r.value << "\"," << summary_csv_row(rec) << '\n';
  }
  return runs;
}

std::optional<std::size_t> first_reaching(const std::vector<RoundRecord>& records, double target) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].test_accuracy && *records[i].test_accuracy >= target) return i;
  }
  return std::nullopt;
}

Report report(const std::vector<fs::path>& dirs, double accuracy_target, std::ostream& text,
              const std::optional<fs::path>& csv) {
  if (dirs.empty()) throw ConfigError("report: no run directories given");
  std::vector<std::vector<RoundRecord>> runs;
  std::vector<std::string> errors;
  for (const auto& d : dirs) {
    try {
      runs.push_back(read_records_jsonl(d / "records.jsonl"));
    } catch (const IngestionError& e) {
      errors.emplace_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "report: unreadable runs:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw IngestionError(msg);
  }

  Report rep;
  rep.rounds = runs.front().size();
  for (const auto& r : runs) rep.rounds = std::min(rep.rounds, r.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].size() != rep.rounds) {
      rep.warnings.push_back(fmt::format("{} has {} rounds; aligned to {}", dirs[i].string(),
                                         runs[i].size(), rep.rounds));
      runs[i].resize(rep.rounds);
    }
  }
  for (const auto& w : rep.warnings) text << "warning: " << w << '\n';

  for (std::size_t i = 0; i < runs.size(); ++i) {
    ReportRow row;
    row.run = dirs[i].filename().empty() ? dirs[i].parent_path().filename().string()
                                         : dirs[i].filename().string();
    double participation = 0.0;
    for (const auto& r : runs[i]) participation += static_cast<double>(r.N_t);
    if (!runs[i].empty()) {
      row.mean_participation = participation / static_cast<double>(runs[i].size());
      row.final_accuracy = runs[i].back().test_accuracy;
    }
    if (const auto hit = first_reaching(runs[i], accuracy_target)) {
      row.rounds_to_target = runs[i][*hit].t;
      row.energy_to_target = runs[i][*hit].cumulative_energy;
    }
    rep.rows.push_back(row);
  }

  text << "per-round accuracy / participation / cumulative energy (J)\n";
  text << fmt::format("{:>5}", "t");
  for (const auto& row : rep.rows) text << fmt::format("  {:>28}", row.run);
  text << '\n';
  for (std::size_t k = 0; k < rep.rounds; ++k) {
    text << fmt::format("{:>5}", runs.front()[k].t);
    for (const auto& r : runs) {
      const auto& rec = r[k];
      const std::string acc = rec.test_accuracy ? fmt::format("{:.4f}", *rec.test_accuracy) : "-";
      text << fmt::format("  {:>8} {:>4} {:>14.6g}", acc, rec.N_t, rec.cumulative_energy);
    }
    text << '\n';
  }

  text << fmt::format("\nenergy to accuracy {:.4f}\n", accuracy_target);
  text << fmt::format("{:<28} {:>8} {:>14} {:>10} {:>10}\n", "run", "rounds", "energy (J)",
                      "mean N_t", "final acc");
  for (const auto& row : rep.rows) {
    text << fmt::format("{:<28} {:>8} {:>14} {:>10.3f} {:>10}\n", row.run,
                        row.rounds_to_target ? std::to_string(*row.rounds_to_target) : "not reached",
                        row.energy_to_target ? fmt::format("{:.6g}", *row.energy_to_target)
                                             : "not reached",
                        row.mean_participation,
                        row.final_accuracy ? fmt::format("{:.4f}", *row.final_accuracy) : "-");
  }

  if (csv) {
    auto out = open_out(*csv);
    out << "run,t,N_t,accuracy,cumulative_energy\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (const auto& rec : runs[i]) {
        out << '"' << rep.rows[i].run << "\"," << rec.t << ',' << rec.N_t << ','
            << cell(rec.test_accuracy) << ',' << format_double(rec.cumulative_energy) << '\n';
      }
    }
  }
  return rep;
}

}  // namespace otafl
