#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference next to
// its OpenMP version; the parallel versions are bitwise independent of the
// thread count, and the tests hold them to the serial reference.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "otafl/rng.hpp"

namespace otafl {
struct Dataset;
struct ModelSpec;
}  // namespace otafl

namespace otafl::kernels {

/// Sample block size of the fixed-shape reductions.
inline constexpr std::size_t kReductionBlock = 256;

void superpose_serial(std::span<const std::vector<double>> updates,
                      std::span<const double> gains, double noise_std, const RngStream& noise,
                      std::span<double> y);

void superpose_parallel(std::span<const std::vector<double>> updates,
                        std::span<const double> gains, double noise_std, const RngStream& noise,
                        std::span<double> y, int workers);

/// Sum of per-sample cross-entropy. The serial version is a straight loop;
/// the parallel one sums fixed blocks and then the block totals in order.
double loss_sum_serial(std::span<const double> w, const Dataset& data, const ModelSpec& spec);
double loss_sum_parallel(std::span<const double> w, const Dataset& data, const ModelSpec& spec,
                         int workers);

std::size_t count_correct_serial(std::span<const double> w, const Dataset& data,
                                 const ModelSpec& spec);
std::size_t count_correct_parallel(std::span<const double> w, const Dataset& data,
                                   const ModelSpec& spec, int workers);

/// Runs body(i) for i in [0, n). Iterations must write disjoint state. If any
/// iteration throws, the exception from the lowest index is rethrown after the
/// loop, whatever the worker count.
template <class Body>
void for_each_index(std::size_t n, int workers, Body&& body) {
  const auto count = static_cast<long long>(n);
  if (workers <= 1) {
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace otafl::kernels
