#include "otafl/denoising.hpp"

#include <cmath>
#include <numeric>

#include "otafl/error.hpp"

namespace otafl {

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

double fading_alpha(std::span<const double> amplitudes) {
  if (amplitudes.empty()) throw NoAggregation("fading_alpha: no active devices");
  return sum(amplitudes) / static_cast<double>(amplitudes.size());
}

double mse_alpha(std::span<const double> amplitudes, std::span<const double> squared_gains,
                 double phi) {
  if (amplitudes.empty()) throw NoAggregation("mse_alpha: no active devices");
  if (amplitudes.size() != squared_gains.size()) {
    throw ContractViolation("mse_alpha: amplitude and gain lists differ in length");
  }
  const double den = sum(amplitudes);
  if (!(den > 0.0)) throw DegenerateChannelError("mse_alpha: all channel amplitudes are zero");
  return (sum(squared_gains) + phi) / den;
}

double mse_objective(double alpha, std::span<const double> amplitudes, double phi, std::size_t N,
                     std::size_t d) {
  if (!(alpha > 0.0)) throw DomainError("mse_objective: alpha must be positive");
  if (N == 0) throw DomainError("mse_objective: N must be positive");
  const double n2 = static_cast<double>(N) * static_cast<double>(N);
  const double dd = static_cast<double>(d);
  double acc = 0.0;
  for (double a : amplitudes) {
    const double r = a / alpha - 1.0;
    acc += r * r;
  }
  return dd / n2 * acc + dd * phi / (alpha * alpha * n2);
}

double variance_alpha_analytic(std::span<const double> powers, double phi) {
  if (powers.empty()) throw NoAggregation("variance_alpha_analytic: no active devices");
  return std::sqrt(sum(powers) + phi) / static_cast<double>(powers.size());
}

double variance_alpha_empirical(const ReceivedSignal& y, std::size_t N) {
  if (y.y.empty()) throw DomainError("variance_alpha_empirical: empty received signal");
  if (N == 0) throw NoAggregation("variance_alpha_empirical: no active devices");
  double energy = 0.0;
  for (double v : y.y) energy += v * v;
  return std::sqrt(energy / static_cast<double>(y.y.size())) / static_cast<double>(N);
}

double select_alpha(DenoisePolicy policy, const ActiveCsi& csi, const ReceivedSignal& y,
                    std::size_t N) {
  switch (policy) {
    case DenoisePolicy::FadingBased:
      return fading_alpha(csi.amplitudes);
    case DenoisePolicy::MseBased:
      return mse_alpha(csi.amplitudes, csi.squared_gains, csi.phi);
    case DenoisePolicy::VarianceAnalytic:
      return variance_alpha_analytic(csi.powers, csi.phi);
    case DenoisePolicy::VarianceEmpirical:
      return variance_alpha_empirical(y, N);
  }
  throw ContractViolation("select_alpha: unknown policy");
}

std::vector<double> denoise(const ReceivedSignal& y, double alpha, std::size_t N) {
  if (N == 0) throw NoAggregation("denoise: no active devices");
  if (!(alpha > 0.0)) throw DegenerateChannelError("denoise: denoising factor is not positive");
  const double scale = alpha * static_cast<double>(N);
  std::vector<double> out(y.y.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = y.y[j] / scale;
  return out;
}

std::vector<double> ideal_aggregate(std::span<const std::vector<double>> diffs) {
  if (diffs.empty()) throw NoAggregation("ideal_aggregate: no updates");
  const std::size_t d = diffs.front().size();
  std::vector<double> out(d, 0.0);
  for (const auto& v : diffs) {
    if (v.size() != d) throw ContractViolation("ideal_aggregate: length mismatch");
    for (std::size_t j = 0; j < d; ++j) out[j] += v[j];
  }
  const double inv = 1.0 / static_cast<double>(diffs.size());
  for (double& x : out) x *= inv;
  return out;
}

double aggregation_error(std::span<const double> s_hat, std::span<const double> s_ideal) {
  if (s_hat.size() != s_ideal.size()) throw ContractViolation("aggregation_error: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < s_hat.size(); ++j) {
    const double e = s_hat[j] - s_ideal[j];
    acc += e * e;
  }
  return acc;
}

}  // namespace otafl
