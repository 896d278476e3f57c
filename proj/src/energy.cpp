#include "otafl/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otafl/error.hpp"

namespace otafl {

void validate(const EnergyParams& p) {
  if (!(p.delta > 0.0 && p.delta <= 1.0)) {
    throw ConfigError("delta_m must lie in (0, 1], got " + std::to_string(p.delta));
  }
  if (!(p.xi > 0.0)) throw ConfigError("xi must be positive");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be finite and >= 0");
    }
  };
  nonneg(p.T_h, "T_h");
  nonneg(p.kappa, "kappa");
  nonneg(p.C_m, "C_m");
  nonneg(p.f_m, "f_m");
  nonneg(p.E_up, "E_up");
  nonneg(p.B_max, "B_max");
  for (double v : p.P_in) nonneg(v, "P_in");
  for (double v : p.P_out) nonneg(v, "P_out");
}

double path_gain(double power, double dist, double xi) {
  if (!(dist > 0.0)) throw DomainError("path_gain: distance must be positive");
  return power * std::pow(dist, -xi);
}

double harvested_energy(const EnergyParams& params, std::span<const double> h_in_sq,
                        std::span<const double> d_in, std::span<const double> h_out_sq,
                        std::span<const double> d_out) {
  if (h_in_sq.size() != params.P_in.size() || d_in.size() != params.P_in.size() ||
      h_out_sq.size() != params.P_out.size() || d_out.size() != params.P_out.size()) {
    throw ContractViolation("harvested_energy: draw/distance lists do not match source counts");
  }
  double received = 0.0;
  for (std::size_t i = 0; i < h_in_sq.size(); ++i) {
    received += path_gain(params.P_in[i], d_in[i], params.xi) * h_in_sq[i];
  }
  for (std::size_t k = 0; k < h_out_sq.size(); ++k) {
    received += path_gain(params.P_out[k], d_out[k], params.xi) * h_out_sq[k];
  }
  return params.T_h * params.delta * received;
}

double computation_energy(const EnergyParams& params, std::size_t dataset_size) {
  return params.kappa * params.C_m * static_cast<double>(dataset_size) * params.f_m * params.f_m;
}

double round_consumption(double E_up, int tau, double E_comp, double fraction) {
  if (tau < 0) throw ContractViolation("round_consumption: negative epoch count");
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ContractViolation("round_consumption: fraction outside [0, 1]");
  }
  if (fraction < 1.0) {
    if (tau != 1) throw ContractViolation("round_consumption: partial dataset requires tau == 1");
    return E_up + fraction * E_comp;
  }
  if (tau == 0) return 0.0;
  return E_up + tau * E_comp;
}

BatteryState update_battery(BatteryState state, double consumed, double harvested, double B_max) {
  if (consumed > state.level) {
    throw ContractViolation("update_battery: consumption " + std::to_string(consumed) +
                            " J exceeds battery " + std::to_string(state.level) + " J");
  }
  return {std::min(B_max, state.level - consumed + harvested)};
}

}  // namespace otafl
