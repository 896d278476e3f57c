#include "otafl/channel.hpp"

#include <cmath>
#include <complex>
#include <numeric>

#include "otafl/energy.hpp"
#include "otafl/error.hpp"
#include "otafl/kernels.hpp"

namespace otafl {

ChannelDraw draw_round_channels(const Geometry& geometry, std::uint64_t t, std::uint64_t seed) {
  const std::size_t M = geometry.devices();
  const std::size_t I = geometry.interferers();
  const std::size_t K = geometry.outband_sources();

  ChannelDraw draw;
  draw.h_up.resize(M);
  draw.g_cci_sq.resize(I);
  draw.h_eh_in_sq = Grid(M, I);
  draw.h_eh_out_sq = Grid(M, K);

  for (std::size_t m = 0; m < M; ++m) {
    auto up = substream(seed, {StreamKind::Uplink, m, t});
    draw.h_up[m] = std::abs(up.complex_gaussian());

    auto in = substream(seed, {StreamKind::HarvestInband, m, t});
    for (std::size_t i = 0; i < I; ++i) draw.h_eh_in_sq(m, i) = std::norm(in.complex_gaussian());

    auto out = substream(seed, {StreamKind::HarvestOutband, m, t});
    for (std::size_t k = 0; k < K; ++k) {
      draw.h_eh_out_sq(m, k) = std::norm(out.complex_gaussian());
    }
  }
  auto cci = substream(seed, {StreamKind::CciToPs, 0, t});
  for (std::size_t i = 0; i < I; ++i) draw.g_cci_sq[i] = std::norm(cci.complex_gaussian());
  return draw;
}

double effective_gain(double P_up, double d_m, double xi, double h_mag) {
  if (!(d_m > 0.0)) throw DomainError("effective_gain: distance must be positive");
  if (P_up < 0.0) throw DomainError("effective_gain: negative transmit power");
  return std::sqrt(P_up * std::pow(d_m, -xi)) * h_mag;
}

double Disturbance::total() const {
  return std::accumulate(interferer_powers.begin(), interferer_powers.end(), 0.0) + N0;
}

Disturbance interference_components(const Geometry& geometry, const ChannelDraw& draw,
                                    std::span<const double> P_in, double xi, double N0) {
  if (P_in.size() != geometry.interferers() || draw.g_cci_sq.size() != geometry.interferers()) {
    throw ContractViolation("interference_power: P_in / draw not aligned with interferers");
  }
  Disturbance out;
  out.N0 = N0;
  out.interferer_powers.reserve(P_in.size());
  for (std::size_t i = 0; i < P_in.size(); ++i) {
    out.interferer_powers.push_back(path_gain(P_in[i], geometry.d_i_in[i], xi) *
                                    draw.g_cci_sq[i]);
  }
  return out;
}

double interference_power(const Geometry& geometry, const ChannelDraw& draw,
                          std::span<const double> P_in, double xi, double N0) {
  return interference_components(geometry, draw, P_in, xi, N0).total();
}

ReceivedSignal superpose(std::span<const std::vector<double>> updates,
                         std::span<const double> gains, const Disturbance& disturbance,
                         std::size_t d, const RngStream& noise, int workers) {
  if (updates.size() != gains.size()) {
    throw ContractViolation("superpose: gains not aligned with updates");
  }
  for (const auto& u : updates) {
    if (u.size() != d) throw ContractViolation("superpose: update dimension mismatch");
  }
  ReceivedSignal out;
  out.y.assign(d, 0.0);
  const double phi = disturbance.total();
  if (phi < 0.0) throw DomainError("superpose: negative disturbance power");
  kernels::superpose_parallel(updates, gains, std::sqrt(phi), noise, out.y, workers);
  return out;
}

}  // namespace otafl
