#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otafl/channel.hpp"

namespace otafl {

enum class DenoisePolicy { FadingBased, MseBased, VarianceAnalytic, VarianceEmpirical };

/// Ground-truth channel state of the active devices. Only the CSI-based
/// policies and the analytic variance formula look at it.
struct ActiveCsi {
  std::vector<double> amplitudes;     // sqrt(P_up d^-xi) |h|
  std::vector<double> squared_gains;  // P_up d^-xi |h|^2
  std::vector<double> powers;         // P_up d^-xi
  double phi = 0.0;                   // interference plus noise power
};

struct AggregateOutcome {
  std::vector<double> s_hat;
  std::vector<double> s_ideal;
  double alpha = 0.0;
  double error_sq = 0.0;
};

/// Mean amplitude of the active devices. Throws NoAggregation when empty.
double fading_alpha(std::span<const double> amplitudes);

/// (sum of squared gains + phi) / (sum of amplitudes): the minimiser of mse_objective.
double mse_alpha(std::span<const double> amplitudes, std::span<const double> squared_gains,
                 double phi);

/// Expected squared aggregation error for unit-power updates, as a function of alpha.
double mse_objective(double alpha, std::span<const double> amplitudes, double phi, std::size_t N,
                     std::size_t d);

/// (1/N) sqrt(sum of powers + phi).
double variance_alpha_analytic(std::span<const double> powers, double phi);

/// sqrt(||y||^2 / d) / N. Sees only the received vector and the active count.
double variance_alpha_empirical(const ReceivedSignal& y, std::size_t N);

/// Denoising factor for `policy`. VarianceEmpirical never touches `csi`.
double select_alpha(DenoisePolicy policy, const ActiveCsi& csi, const ReceivedSignal& y,
                    std::size_t N);

/// y / (alpha N). Throws DegenerateChannelError if alpha <= 0.
std::vector<double> denoise(const ReceivedSignal& y, double alpha, std::size_t N);

/// Elementwise mean of the updates. Throws NoAggregation when empty.
std::vector<double> ideal_aggregate(std::span<const std::vector<double>> diffs);

/// ||s_hat - s_ideal||^2.
double aggregation_error(std::span<const double> s_hat, std::span<const double> s_ideal);

}  // namespace otafl
