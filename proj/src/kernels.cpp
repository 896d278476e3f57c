#include "otafl/kernels.hpp"

#include <algorithm>
#include <vector>

#include "otafl/learning.hpp"

namespace otafl::kernels {

void superpose_serial(std::span<const std::vector<double>> updates,
                      std::span<const double> gains, double noise_std, const RngStream& noise,
                      std::span<double> y) {
  for (std::size_t j = 0; j < y.size(); ++j) {
    double acc = 0.0;
    for (std::size_t m = 0; m < updates.size(); ++m) acc += gains[m] * updates[m][j];
    if (noise_std > 0.0) acc += noise_std * noise.normal_at(j);
    y[j] = acc;
  }
}

void superpose_parallel(std::span<const std::vector<double>> updates,
                        std::span<const double> gains, double noise_std, const RngStream& noise,
                        std::span<double> y, int workers) {
  const auto d = static_cast<long long>(y.size());
  const std::size_t devices = updates.size();
#pragma omp parallel for num_threads(workers > 0 ? workers : 1) schedule(static)
  for (long long jj = 0; jj < d; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    double acc = 0.0;
    for (std::size_t m = 0; m < devices; ++m) acc += gains[m] * updates[m][j];
    if (noise_std > 0.0) acc += noise_std * noise.normal_at(j);
    y[j] = acc;
  }
}

double loss_sum_serial(std::span<const double> w, const Dataset& data, const ModelSpec& spec) {
  Workspace ws;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += sample_loss(w, data.sample(i), data.labels[i], spec, ws);
  }
  return total;
}

double loss_sum_parallel(std::span<const double> w, const Dataset& data, const ModelSpec& spec,
                         int workers) {
  const std::size_t n = data.size();
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel num_threads(workers > 0 ? workers : 1)
  {
    Workspace ws;
#pragma omp for schedule(static)
    for (long long bb = 0; bb < static_cast<long long>(blocks); ++bb) {
      const auto b = static_cast<std::size_t>(bb);
      const std::size_t end = std::min(n, (b + 1) * kReductionBlock);
      double acc = 0.0;
      for (std::size_t i = b * kReductionBlock; i < end; ++i) {
        acc += sample_loss(w, data.sample(i), data.labels[i], spec, ws);
      }
      partial[b] = acc;
    }
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

std::size_t count_correct_serial(std::span<const double> w, const Dataset& data,
                                 const ModelSpec& spec) {
  Workspace ws;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict(w, data.sample(i), spec, ws) == data.labels[i]) ++correct;
  }
  return correct;
}

std::size_t count_correct_parallel(std::span<const double> w, const Dataset& data,
                                   const ModelSpec& spec, int workers) {
  long long correct = 0;
  const auto n = static_cast<long long>(data.size());
#pragma omp parallel num_threads(workers > 0 ? workers : 1) reduction(+ : correct)
  {
    Workspace ws;
#pragma omp for schedule(static)
    for (long long i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      if (predict(w, data.sample(idx), spec, ws) == data.labels[idx]) ++correct;
    }
  }
  return static_cast<std::size_t>(correct);
}

}  // namespace otafl::kernels
