#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "otafl/denoising.hpp"
#include "otafl/energy.hpp"
#include "otafl/learning.hpp"
#include "otafl/scheduling.hpp"
#include "otafl/topology.hpp"

namespace otafl {

enum class DatasetSource { Synthetic, Idx };

/// `Ideal` replaces the received aggregate by the exact mean of the updates
/// (no channel at all); used as the reference trajectory.
enum class AggregationMode { OverTheAir, Ideal };

/// Every parameter of a run, in SI units. Defaults follow the reference
/// deployment: 200 m x 200 m area, 100 in-band and 100 out-band sources at 0.1 W,
/// 10 dBm uplink, -80 dBm noise floor, 50 J batteries.
struct SimConfig {
  std::uint64_t seed = 1;
  int T = 100;
  std::size_t M = 10;
  std::size_t I = 100;
  std::size_t K = 100;
  Band device_band{20.0, 100.0};
  Band inband_band{120.0, 140.0};
  Band outband_band{25.0, 100.0};

  double delta_m = 0.9;
  double xi = 2.5;
  double P_in = 0.1;    // W
  double P_out = 0.1;   // W
  double P_up = 0.01;   // W (10 dBm)
  double E_up = 1e-3;   // J per transmission
  double T_h = 1.0;     // s
  double N0 = 1e-11;    // W (-80 dBm)
  double B_max = 50.0;  // J
  double B_init = 50.0; // J
  double eta = 0.01;
  double kappa = 1e-28;
  double C_m = 1.3e4;
  double f_m = 2e9;

  std::size_t samples_per_device = 1200;
  ModelSpec model;
  DatasetSource dataset = DatasetSource::Synthetic;
  double separation = 3.0;
  std::size_t test_samples = 2000;
  std::string idx_train_images;
  std::string idx_train_labels;
  std::string idx_test_images;
  std::string idx_test_labels;
  std::size_t batch_size = 0;

  SchedulerKind scheduler;
  DenoisePolicy denoise = DenoisePolicy::VarianceEmpirical;
  AggregationMode aggregation = AggregationMode::OverTheAir;
  // Devices send tx_scale * dw and the PS divides it back out, which puts the
  // desk-scale updates (per-coordinate RMS around 1e-3) near unit power.
  double tx_scale = 1000.0;
  int eval_every = 1;
  double L_smooth = 1.0;  // smoothness constant fed to the convergence bound
  int workers = 1;
  std::string out_dir;

  bool operator==(const SimConfig&) const = default;

  [[nodiscard]] Placement placement() const;
  [[nodiscard]] EnergyParams energy_params() const;
};

/// dBm -> W.
double dbm_to_watts(double dbm);

/// "0.1 W", "100 mW", "10 dBm" or "off". A bare number is rejected.
double parse_power(std::string_view field, std::string_view text);

/// Sets one field from its textual form. Throws ConfigError naming the field.
void apply_setting(SimConfig& config, std::string_view key, std::string_view value);

/// Applies "key=value" strings in order.
void apply_overrides(SimConfig& config, const std::vector<std::string>& overrides);

/// Throws ConfigError on any out-of-range value.
void validate(const SimConfig& config);

/// Parses a key = value document (# comments) on top of the defaults, then
/// applies `overrides` and validates.
SimConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides = {});

/// Empty `path` means defaults only.
SimConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical document; parse_config_text(emit_config(c)) == c.
std::string emit_config(const SimConfig& config);

/// Every key accepted by apply_setting, in emission order.
const std::vector<std::string>& config_keys();

std::string to_string(DenoisePolicy policy);
std::string to_string(SchedulerVariant variant);
std::string to_string(ModelKind kind);

}  // namespace otafl
