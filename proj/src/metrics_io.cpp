#include "otafl/metrics_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "otafl/error.hpp"

namespace otafl {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "null"; }

template <typename T, typename Fmt>
std::string array(const std::vector<T>& values, Fmt fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  out += ']';
  return out;
}

std::string doubles(const std::vector<double>& v) { return array(v, format_double); }

template <typename T>
std::string integers(const std::vector<T>& v) {
  return array(v, [](T x) { return std::to_string(x); });
}

std::optional<double> get_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string record_to_json(const RoundRecord& r) {
  std::string s;
  s.reserve(512);
  s += "{\"t\":" + std::to_string(r.t);
  s += ",\"N_t\":" + std::to_string(r.N_t);
  s += ",\"active_ids\":" + integers(r.active_ids);
  s += ",\"tau\":" + integers(r.tau_per_device);
  s += ",\"fractions\":" + doubles(r.fractions);
  s += ",\"alpha\":" + opt(r.alpha);
  s += ",\"error_sq\":" + opt(r.error_sq);
  s += ",\"phi\":" + format_double(r.phi);
  s += ",\"global_loss\":" + opt(r.global_loss);
  s += ",\"test_accuracy\":" + opt(r.test_accuracy);
  s += ",\"global_grad_sq\":" + opt(r.global_grad_sq);
  s += ",\"max_local_grad_sq\":" + format_double(r.max_local_grad_sq);
  s += ",\"harvested\":" + doubles(r.harvested);
  s += ",\"consumed\":" + doubles(r.consumed);
  s += ",\"discarded\":" + doubles(r.discarded);
  s += ",\"battery_after\":" + doubles(r.battery_after);
  s += ",\"cumulative_consumed\":" + format_double(r.cumulative_consumed);
  s += ",\"cumulative_discarded\":" + format_double(r.cumulative_discarded);
  s += ",\"cumulative_energy\":" + format_double(r.cumulative_energy);
  s += '}';
  return s;
}

std::string diagnostics_to_json(const ConvergenceDiagnostics& d) {
  std::ostringstream s;
  s << "{\n"
    << "  \"G_sq_hat\": " << format_double(d.G_sq_hat) << ",\n"
    << "  \"zeta_sq_hat\": " << format_double(d.zeta_sq_hat) << ",\n"
    << "  \"tau_hat_min\": " << format_double(d.tau_hat_min) << ",\n"
    << "  \"tau_hat_max\": " << format_double(d.tau_hat_max) << ",\n"
    << "  \"initial_loss\": " << format_double(d.initial_loss) << ",\n"
    << "  \"f_star_proxy\": " << format_double(d.f_star_proxy) << ",\n"
    << "  \"delta0\": " << format_double(d.delta0) << ",\n"
    << "  \"L\": " << format_double(d.L) << ",\n"
    << "  \"eta\": " << format_double(d.eta) << ",\n"
    << "  \"T\": " << d.T << ",\n"
    << "  \"bound_value\": " << format_double(d.bound_value) << ",\n"
    << "  \"avg_grad_norm_sq\": " << opt(d.avg_grad_norm_sq) << ",\n"
    << "  \"tau_bar_per_round\": "
    << array(d.tau_bar_per_round, [](const std::optional<double>& v) { return opt(v); })
    << "\n}\n";
  return s.str();
}

std::string summary_csv_header() { return "t,N_t,alpha,error_sq,loss,accuracy,cumulative_energy"; }

std::string summary_csv_row(const RoundRecord& r) {
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; };
  return std::to_string(r.t) + ',' + std::to_string(r.N_t) + ',' + cell(r.alpha) + ',' +
         cell(r.error_sq) + ',' + cell(r.global_loss) + ',' + cell(r.test_accuracy) + ',' +
         format_double(r.cumulative_energy);
}

void write_summary_csv(std::ostream& out, const std::vector<RoundRecord>& records) {
  out << summary_csv_header() << '\n';
  for (const auto& r : records) out << summary_csv_row(r) << '\n';
}

RoundRecord record_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestionError(std::string("malformed record: ") + e.what());
  }
  try {
    RoundRecord r;
    r.t = j.at("t").get<int>();
    r.N_t = j.at("N_t").get<std::size_t>();
    r.active_ids = j.at("active_ids").get<std::vector<std::size_t>>();
    r.tau_per_device = j.at("tau").get<std::vector<int>>();
    r.fractions = j.at("fractions").get<std::vector<double>>();
    r.alpha = get_opt(j, "alpha");
    r.error_sq = get_opt(j, "error_sq");
    r.phi = j.at("phi").get<double>();
    r.global_loss = get_opt(j, "global_loss");
    r.test_accuracy = get_opt(j, "test_accuracy");
    r.global_grad_sq = get_opt(j, "global_grad_sq");
    r.max_local_grad_sq = j.at("max_local_grad_sq").get<double>();
    r.harvested = j.at("harvested").get<std::vector<double>>();
    r.consumed = j.at("consumed").get<std::vector<double>>();
    r.discarded = j.at("discarded").get<std::vector<double>>();
    r.battery_after = j.at("battery_after").get<std::vector<double>>();
    r.cumulative_consumed = j.at("cumulative_consumed").get<double>();
    r.cumulative_discarded = j.at("cumulative_discarded").get<double>();
    r.cumulative_energy = j.at("cumulative_energy").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("bad record field: ") + e.what());
  }
}

std::vector<RoundRecord> read_records_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(path.string() + ": cannot open");
  std::vector<RoundRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const IngestionError& e) {
      throw IngestionError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace otafl
