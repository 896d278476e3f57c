#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace otafl {

/// Per-device energy constants. All values SI (s, W, J, Hz).
struct EnergyParams {
  double T_h = 1.0;            // round duration
  double delta = 0.9;          // RF-to-DC conversion efficiency, (0, 1]
  double xi = 2.5;             // path-loss exponent
  std::vector<double> P_in;    // per in-band source
  std::vector<double> P_out;   // per out-band source
  double kappa = 1e-28;        // effective switched capacitance
  double C_m = 1.3e4;          // CPU cycles per sample
  double f_m = 2e9;            // processor frequency
  double E_up = 1e-3;          // uplink energy per transmission
  double B_max = 50.0;
};

void validate(const EnergyParams& params);

struct BatteryState {
  double level = 0.0;
};

/// Received power P * d^-xi.
double path_gain(double power, double dist, double xi);

/// Energy harvested over one round from every in-band and out-band source.
/// `h_in_sq`/`d_in` are this device's rows over the in-band sources, likewise for out-band.
double harvested_energy(const EnergyParams& params, std::span<const double> h_in_sq,
                        std::span<const double> d_in, std::span<const double> h_out_sq,
                        std::span<const double> d_out);

/// Energy of one local epoch over `dataset_size` samples.
double computation_energy(const EnergyParams& params, std::size_t dataset_size);

/// Uplink plus computation. `fraction` < 1 is the single-epoch partial-dataset case.
double round_consumption(double E_up, int tau, double E_comp, double fraction = 1.0);

BatteryState update_battery(BatteryState state, double consumed, double harvested, double B_max);

/// Activity indicator: a device may spend `required` only if the battery covers it.
inline bool is_eligible(double level, double required) { return level >= required; }

}  // namespace otafl
