#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/energy.hpp"
#include "otafl/learning.hpp"
#include "otafl/topology.hpp"

namespace otafl {

struct DeviceState {
  BatteryState battery;
  Dataset data;
  double E_comp = 0.0;  // energy of one full-dataset epoch
};

/// Everything measured in one communication round.
struct RoundRecord {
  int t = 0;
  std::vector<std::size_t> active_ids;
  std::size_t N_t = 0;
  std::vector<int> tau_per_device;    // aligned with active_ids
  std::vector<double> fractions;      // aligned with active_ids
  std::optional<double> alpha;        // absent when nothing was aggregated over the air
  std::optional<double> error_sq;     // ||s_hat - s||^2, absent on idle rounds
  double phi = 0.0;
  std::optional<double> global_loss;  // F(w_{t+1}) over all devices, at eval cadence
  std::optional<double> test_accuracy;
  std::optional<double> global_grad_sq;  // ||grad F(w_t)||^2 over the active datasets
  double max_local_grad_sq = 0.0;
  std::vector<double> harvested;      // per device
  std::vector<double> consumed;       // per device
  std::vector<double> discarded;      // per device
  std::vector<double> battery_after;  // per device
  double cumulative_consumed = 0.0;
  double cumulative_discarded = 0.0;
  double cumulative_energy = 0.0;     // consumed + discarded
};

struct ConvergenceDiagnostics {
  double G_sq_hat = 0.0;
  double zeta_sq_hat = 0.0;
  std::vector<std::optional<double>> tau_bar_per_round;
  double tau_hat_min = 0.0;
  double tau_hat_max = 0.0;
  double initial_loss = 0.0;
  double f_star_proxy = 0.0;
  double delta0 = 0.0;
  double L = 0.0;
  double eta = 0.0;
  int T = 0;
  double bound_value = 0.0;
  std::optional<double> avg_grad_norm_sq;
};

/// Delta0/(eta T tau_min) + L eta tau_max G^2 / 2 + L zeta^2 / (2 eta tau_min).
double convergence_bound(double delta0, double eta, int T, double tau_min, double tau_max, double L,
                         double G_sq, double zeta_sq);

/// Plug-in estimates of the bound's constants from a finished run. Idle rounds
/// contribute nothing. Throws DomainError if every round was idle.
ConvergenceDiagnostics estimate_diagnostics(std::span<const RoundRecord> records, double eta,
                                            double L, double initial_loss);

/// Owns the run state and advances it one round at a time.
class Simulator {
 public:
  explicit Simulator(SimConfig config);

  RoundRecord run_round();

  [[nodiscard]] int next_round() const { return t_; }
  [[nodiscard]] const SimConfig& config() const { return config_; }
  [[nodiscard]] const ModelVector& model() const { return w_; }
  [[nodiscard]] const Geometry& geometry() const { return geometry_; }
  [[nodiscard]] const std::vector<DeviceState>& devices() const { return devices_; }
  [[nodiscard]] const Dataset& test_set() const { return test_; }
  [[nodiscard]] double initial_loss() const { return initial_loss_; }

 private:
  SimConfig config_;
  EnergyParams energy_;
  Geometry geometry_;
  std::vector<DeviceState> devices_;
  Dataset test_;
  ModelVector w_;
  double initial_loss_ = 0.0;
  double cumulative_consumed_ = 0.0;
  double cumulative_discarded_ = 0.0;
  int t_ = 1;
};

struct RunResult {
  std::vector<RoundRecord> records;
  std::optional<ConvergenceDiagnostics> diagnostics;  // absent if every round was idle
  ModelVector final_model;
  double initial_loss = 0.0;
  double initial_accuracy = 0.0;
};

using RecordSink = std::function<void(const RoundRecord&)>;

RunResult run(const SimConfig& config, const RecordSink& sink = {});

}  // namespace otafl
