#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otafl/grid.hpp"
#include "otafl/rng.hpp"
#include "otafl/topology.hpp"

namespace otafl {

/// One round of small-scale fading. Every device gets an uplink draw whether
/// or not it ends up active, so schedulers compared on a shared seed see the
/// same channels.
struct ChannelDraw {
  std::vector<double> h_up;  // |h_m| per device
  std::vector<double> g_cci_sq;  // |g_i|^2 per interferer
  Grid h_eh_in_sq;   // device x interferer, |h^in|^2
  Grid h_eh_out_sq;  // device x outband, |h^out|^2
};

ChannelDraw draw_round_channels(const Geometry& geometry, std::uint64_t t, std::uint64_t seed);

/// sqrt(P_up d^-xi) |h|: the real amplitude a phase-aligned update arrives with.
double effective_gain(double P_up, double d_m, double xi, double h_mag);

/// Interference-plus-noise power at the PS, split so the total is reproducible.
struct Disturbance {
  std::vector<double> interferer_powers;  // P_i d_i^-xi |g_i|^2
  double N0 = 0.0;
  [[nodiscard]] double total() const;
};

Disturbance interference_components(const Geometry& geometry, const ChannelDraw& draw,
                                    std::span<const double> P_in, double xi, double N0);

/// phi_t = sum_i P_i d_i^-xi |g_i|^2 + N0.
double interference_power(const Geometry& geometry, const ChannelDraw& draw,
                          std::span<const double> P_in, double xi, double N0);

struct ReceivedSignal {
  std::vector<double> y;
  [[nodiscard]] std::size_t dimension() const { return y.size(); }
};

/// y = sum_m gain_m * update_m + c with c ~ N(0, phi I_d); element j of c is
/// drawn from `noise` at index j, so the result does not depend on `workers`.
ReceivedSignal superpose(std::span<const std::vector<double>> updates,
                         std::span<const double> gains, const Disturbance& disturbance,
                         std::size_t d, const RngStream& noise, int workers = 1);

}  // namespace otafl
