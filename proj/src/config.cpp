#include "otafl/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "otafl/error.hpp"

namespace otafl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void fail(std::string_view field, const std::string& why) {
  throw ConfigError(std::string(field) + ": " + why);
}

// Splits "12.5 dBm" into the number and its (possibly empty) unit.
std::pair<double, std::string> number_with_unit(std::string_view field, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr == text.data()) {
    fail(field, "expected a number, got '" + std::string(text) + "'");
  }
  const auto unit = trim(std::string_view(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr)));
  return {value, std::string(unit)};
}

double parse_scaled(std::string_view field, std::string_view text,
                    std::initializer_list<std::pair<const char*, double>> units) {
  auto [value, unit] = number_with_unit(field, text);
  for (const auto& [name, scale] : units) {
    if (unit == name) return value * scale;
  }
  std::string allowed;
  for (const auto& u : units) allowed += std::string(allowed.empty() ? "" : ", ") + "'" + u.first + "'";
  fail(field, "unsupported unit '" + unit + "' (allowed: " + allowed + ")");
}

double parse_energy(std::string_view field, std::string_view text) {
  return parse_scaled(field, text, {{"", 1.0}, {"J", 1.0}, {"mJ", 1e-3}, {"uJ", 1e-6}});
}

double parse_plain(std::string_view field, std::string_view text) {
  return parse_scaled(field, text, {{"", 1.0}});
}

std::int64_t parse_int(std::string_view field, std::string_view text) {
  text = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(field, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view field, std::string_view text) {
  const auto v = parse_int(field, text);
  if (v < 0) fail(field, "must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_seed(std::string_view field, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(field, "expected an unsigned integer, got '" + std::string(text) + "'");
  }
  return v;
}

Band parse_band(std::string_view field, std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) fail(field, "expected 'inner, outer'");
  const auto inner = parse_scaled(field, text.substr(0, comma), {{"", 1.0}, {"m", 1.0}});
  const auto outer = parse_scaled(field, text.substr(comma + 1), {{"", 1.0}, {"m", 1.0}});
  return {inner, outer};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  const char* key;
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<std::string(const SimConfig&)> get;
};

DenoisePolicy parse_policy(std::string_view field, std::string_view text) {
  const auto v = lower(trim(text));
  if (v == "fading" || v == "fading-based") return DenoisePolicy::FadingBased;
  if (v == "mse" || v == "mse-based") return DenoisePolicy::MseBased;
  if (v == "variance-analytic") return DenoisePolicy::VarianceAnalytic;
  if (v == "variance-empirical" || v == "variance") return DenoisePolicy::VarianceEmpirical;
  fail(field, "unknown policy '" + v + "' (fading, mse, variance-analytic, variance-empirical)");
}

SchedulerVariant parse_scheduler(std::string_view field, std::string_view text) {
  const auto v = lower(trim(text));
  if (v == "adaptive") return SchedulerVariant::Adaptive;
  if (v == "nonadaptive-storage") return SchedulerVariant::NonAdaptiveWithStorage;
  if (v == "nonadaptive-nostorage") return SchedulerVariant::NonAdaptiveNoStorage;
  fail(field, "unknown scheduler '" + v +
                  "' (adaptive, nonadaptive-storage, nonadaptive-nostorage)");
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto count_field = [&f](const char* key, std::size_t SimConfig::*member) {
      f.push_back({key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_count(key, v); },
                   [member](const SimConfig& c) { return std::to_string(c.*member); }});
    };
    auto int_field = [&f](const char* key, int SimConfig::*member) {
      f.push_back({key,
                   [key, member](SimConfig& c, std::string_view v) {
                     c.*member = static_cast<int>(parse_int(key, v));
                   },
                   [member](const SimConfig& c) { return std::to_string(c.*member); }});
    };
    auto plain_field = [&f](const char* key, double SimConfig::*member) {
      f.push_back({key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_plain(key, v); },
                   [member](const SimConfig& c) { return fmt(c.*member); }});
    };
    auto power_field = [&f](const char* key, double SimConfig::*member) {
      f.push_back({key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_power(key, v); },
                   [member](const SimConfig& c) { return fmt(c.*member) + " W"; }});
    };
    auto energy_field = [&f](const char* key, double SimConfig::*member) {
      f.push_back({key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_energy(key, v); },
                   [member](const SimConfig& c) { return fmt(c.*member) + " J"; }});
    };
    auto band_field = [&f](const char* key, Band SimConfig::*member) {
      f.push_back({key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_band(key, v); },
                   [member](const SimConfig& c) {
                     return fmt((c.*member).inner) + ", " + fmt((c.*member).outer);
                   }});
    };
    auto string_field = [&f](const char* key, std::string SimConfig::*member) {
      f.push_back({key, [member](SimConfig& c, std::string_view v) { c.*member = std::string(trim(v)); },
                   [member](const SimConfig& c) { return c.*member; }});
    };

    f.push_back({"seed", [](SimConfig& c, std::string_view v) { c.seed = parse_seed("seed", v); },
                 [](const SimConfig& c) { return std::to_string(c.seed); }});
    int_field("T", &SimConfig::T);
    count_field("M", &SimConfig::M);
    count_field("I", &SimConfig::I);
    count_field("K", &SimConfig::K);
    band_field("device_band", &SimConfig::device_band);
    band_field("inband_band", &SimConfig::inband_band);
    band_field("outband_band", &SimConfig::outband_band);
    plain_field("delta_m", &SimConfig::delta_m);
    plain_field("xi", &SimConfig::xi);
    power_field("P_in", &SimConfig::P_in);
    power_field("P_out", &SimConfig::P_out);
    power_field("P_up", &SimConfig::P_up);
    energy_field("E_up", &SimConfig::E_up);
    f.push_back({"T_h",
                 [](SimConfig& c, std::string_view v) {
                   c.T_h = parse_scaled("T_h", v, {{"", 1.0}, {"s", 1.0}, {"ms", 1e-3}});
                 },
                 [](const SimConfig& c) { return fmt(c.T_h) + " s"; }});
    power_field("N0", &SimConfig::N0);
    energy_field("B_max", &SimConfig::B_max);
    energy_field("B_init", &SimConfig::B_init);
    plain_field("eta", &SimConfig::eta);
    plain_field("kappa", &SimConfig::kappa);
    plain_field("C_m", &SimConfig::C_m);
    f.push_back({"f_m",
                 [](SimConfig& c, std::string_view v) {
                   c.f_m = parse_scaled("f_m", v, {{"", 1.0}, {"Hz", 1.0}, {"MHz", 1e6}, {"GHz", 1e9}});
                 },
                 [](const SimConfig& c) { return fmt(c.f_m) + " Hz"; }});
    count_field("samples_per_device", &SimConfig::samples_per_device);
    f.push_back({"model",
                 [](SimConfig& c, std::string_view v) {
                   const auto s = lower(trim(v));
                   if (s == "logistic") c.model.kind = ModelKind::LogisticRegression;
                   else if (s == "mlp") c.model.kind = ModelKind::OneHiddenLayerMlp;
                   else fail("model", "unknown model '" + s + "' (logistic, mlp)");
                 },
                 [](const SimConfig& c) { return to_string(c.model.kind); }});
    f.push_back({"input_dim",
                 [](SimConfig& c, std::string_view v) { c.model.input_dim = parse_count("input_dim", v); },
                 [](const SimConfig& c) { return std::to_string(c.model.input_dim); }});
    f.push_back({"num_classes",
                 [](SimConfig& c, std::string_view v) { c.model.num_classes = parse_count("num_classes", v); },
                 [](const SimConfig& c) { return std::to_string(c.model.num_classes); }});
    f.push_back({"hidden_units",
                 [](SimConfig& c, std::string_view v) { c.model.hidden_units = parse_count("hidden_units", v); },
                 [](const SimConfig& c) { return std::to_string(c.model.hidden_units); }});
    f.push_back({"dataset",
                 [](SimConfig& c, std::string_view v) {
                   const auto s = lower(trim(v));
                   if (s == "synthetic") c.dataset = DatasetSource::Synthetic;
                   else if (s == "idx") c.dataset = DatasetSource::Idx;
                   else fail("dataset", "unknown source '" + s + "' (synthetic, idx)");
                 },
                 [](const SimConfig& c) {
                   return std::string(c.dataset == DatasetSource::Synthetic ? "synthetic" : "idx");
                 }});
    plain_field("separation", &SimConfig::separation);
    count_field("test_samples", &SimConfig::test_samples);
    string_field("idx_train_images", &SimConfig::idx_train_images);
    string_field("idx_train_labels", &SimConfig::idx_train_labels);
    string_field("idx_test_images", &SimConfig::idx_test_images);
    string_field("idx_test_labels", &SimConfig::idx_test_labels);
    count_field("batch_size", &SimConfig::batch_size);
    f.push_back({"scheduler",
                 [](SimConfig& c, std::string_view v) {
                   c.scheduler.variant = parse_scheduler("scheduler", v);
                 },
                 [](const SimConfig& c) { return to_string(c.scheduler.variant); }});
    f.push_back({"fixed_tau",
                 [](SimConfig& c, std::string_view v) {
                   c.scheduler.fixed_tau = static_cast<int>(parse_int("fixed_tau", v));
                 },
                 [](const SimConfig& c) { return std::to_string(c.scheduler.fixed_tau); }});
    f.push_back({"tau_cap",
                 [](SimConfig& c, std::string_view v) {
                   const auto s = lower(trim(v));
                   if (s == "none" || s == "off") c.scheduler.tau_cap.reset();
                   else c.scheduler.tau_cap = static_cast<int>(parse_int("tau_cap", v));
                 },
                 [](const SimConfig& c) {
                   return c.scheduler.tau_cap ? std::to_string(*c.scheduler.tau_cap) : std::string("none");
                 }});
    f.push_back({"denoise",
                 [](SimConfig& c, std::string_view v) { c.denoise = parse_policy("denoise", v); },
                 [](const SimConfig& c) { return to_string(c.denoise); }});
    f.push_back({"aggregation",
                 [](SimConfig& c, std::string_view v) {
                   const auto s = lower(trim(v));
                   if (s == "ota") c.aggregation = AggregationMode::OverTheAir;
                   else if (s == "ideal") c.aggregation = AggregationMode::Ideal;
                   else fail("aggregation", "unknown mode '" + s + "' (ota, ideal)");
                 },
                 [](const SimConfig& c) {
                   return std::string(c.aggregation == AggregationMode::OverTheAir ? "ota" : "ideal");
                 }});
    plain_field("tx_scale", &SimConfig::tx_scale);
    int_field("eval_every", &SimConfig::eval_every);
    plain_field("L_smooth", &SimConfig::L_smooth);
    int_field("workers", &SimConfig::workers);
    string_field("out_dir", &SimConfig::out_dir);
    return f;
  }();
  return table;
}

}  // namespace

Placement SimConfig::placement() const {
  return {M, I, K, device_band, inband_band, outband_band};
}

EnergyParams SimConfig::energy_params() const {
  EnergyParams p;
  p.T_h = T_h;
  p.delta = delta_m;
  p.xi = xi;
  p.P_in.assign(I, P_in);
  p.P_out.assign(K, P_out);
  p.kappa = kappa;
  p.C_m = C_m;
  p.f_m = f_m;
  p.E_up = E_up;
  p.B_max = B_max;
  return p;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double parse_power(std::string_view field, std::string_view text) {
  if (lower(trim(text)) == "off") return 0.0;
  auto [value, unit] = number_with_unit(field, text);
  if (unit == "W") return value;
  if (unit == "mW") return value * 1e-3;
  if (unit == "dBm") return dbm_to_watts(value);
  if (unit.empty()) fail(field, "power requires a unit (W, mW or dBm)");
  fail(field, "unsupported power unit '" + unit + "' (W, mW, dBm)");
}

void apply_setting(SimConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void apply_overrides(SimConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    apply_setting(config, std::string_view(o).substr(0, eq), std::string_view(o).substr(eq + 1));
  }
}

void validate(const SimConfig& c) {
  if (c.T < 0) fail("T", "must be >= 0");
  validate_band(c.device_band, "device_band");
  validate_band(c.inband_band, "inband_band");
  validate_band(c.outband_band, "outband_band");
  if (!(c.delta_m > 0.0 && c.delta_m <= 1.0)) fail("delta_m", "δ ∈ (0,1] required");
  if (!(c.xi > 0.0)) fail("xi", "must be > 0");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(name, "must be finite and >= 0");
  };
  nonneg(c.P_in, "P_in");
  nonneg(c.P_out, "P_out");
  nonneg(c.P_up, "P_up");
  nonneg(c.E_up, "E_up");
  nonneg(c.T_h, "T_h");
  nonneg(c.N0, "N0");
  nonneg(c.B_max, "B_max");
  nonneg(c.B_init, "B_init");
  nonneg(c.kappa, "kappa");
  nonneg(c.L_smooth, "L_smooth");
  if (c.B_init > c.B_max) fail("B_init", "must not exceed B_max");
  if (!(c.C_m > 0.0)) fail("C_m", "must be > 0");
  if (!(c.f_m > 0.0)) fail("f_m", "must be > 0");
  if (!(c.kappa > 0.0)) fail("kappa", "must be > 0");
  if (!(c.eta > 0.0)) fail("eta", "must be > 0");
  if (c.samples_per_device == 0) fail("samples_per_device", "must be >= 1");
  if (c.test_samples == 0 && c.dataset == DatasetSource::Synthetic) fail("test_samples", "must be >= 1");
  if (!(c.separation >= 0.0)) fail("separation", "must be >= 0");
  if (c.scheduler.fixed_tau < 1) fail("fixed_tau", "must be >= 1");
  if (c.scheduler.tau_cap && *c.scheduler.tau_cap < 1) fail("tau_cap", "must be >= 1 or none");
  if (!(c.tx_scale > 0.0)) fail("tx_scale", "must be > 0");
  if (c.eval_every < 1) fail("eval_every", "must be >= 1");
  if (c.workers < 1) fail("workers", "must be >= 1");
  c.model.validate();
  if (c.dataset == DatasetSource::Idx) {
    if (c.idx_train_images.empty() || c.idx_train_labels.empty() || c.idx_test_images.empty() ||
        c.idx_test_labels.empty()) {
      fail("dataset", "idx source needs idx_train_images/labels and idx_test_images/labels");
    }
  }
}

SimConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides) {
  SimConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
  apply_overrides(config, overrides);
  validate(config);
  return config;
}

SimConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return parse_config_text("", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string emit_config(const SimConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

std::string to_string(DenoisePolicy policy) {
  switch (policy) {
    case DenoisePolicy::FadingBased: return "fading";
    case DenoisePolicy::MseBased: return "mse";
    case DenoisePolicy::VarianceAnalytic: return "variance-analytic";
    case DenoisePolicy::VarianceEmpirical: return "variance-empirical";
  }
  return "?";
}

std::string to_string(SchedulerVariant variant) {
  switch (variant) {
    case SchedulerVariant::Adaptive: return "adaptive";
    case SchedulerVariant::NonAdaptiveWithStorage: return "nonadaptive-storage";
    case SchedulerVariant::NonAdaptiveNoStorage: return "nonadaptive-nostorage";
  }
  return "?";
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::LogisticRegression ? "logistic" : "mlp";
}

}  // namespace otafl
