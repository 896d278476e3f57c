// Serial reference vs OpenMP kernels. Usage: otafl_bench [workers] [reps]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "otafl/kernels.hpp"
#include "otafl/learning.hpp"

using namespace otafl;

namespace {

double best_ms(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-34s %10.3f %10.3f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("workers %d, best of %d\n", workers, reps);
  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  // Full-scale model size from the reference CNN, 10 active devices.
  const std::size_t d = 582026;
  auto s = substream(1, {StreamKind::MonteCarlo});
  std::vector<std::vector<double>> updates(10, std::vector<double>(d));
  for (auto& u : updates)
    for (double& v : u) v = 1e-3 * s.normal();
  std::vector<double> gains(updates.size());
  for (double& g : gains) g = 3e-4 * std::abs(s.complex_gaussian());
  const auto noise = substream(1, {StreamKind::Noise, 0, 1});
  std::vector<double> y(d);
  double sink = 0.0;

  row("superpose d=582026 N=10",
      best_ms(reps, [&] { kernels::superpose_serial(updates, gains, 4e-3, noise, y); sink += y[0]; }),
      best_ms(reps, [&] { kernels::superpose_parallel(updates, gains, 4e-3, noise, y, workers); sink += y[0]; }));

  for (const ModelSpec spec : {ModelSpec{ModelKind::LogisticRegression, 20, 10, 0},
                               ModelSpec{ModelKind::OneHiddenLayerMlp, 20, 10, 32}}) {
    const auto data = make_synthetic_dataset(10, 24000, 20, 3.0, s);
    std::vector<double> w(spec.parameter_count());
    for (double& v : w) v = 0.1 * s.normal();
    const bool lr = spec.kind == ModelKind::LogisticRegression;
    row(lr ? "loss sum, logistic, 24000 samples" : "loss sum, mlp, 24000 samples",
        best_ms(reps, [&] { sink += kernels::loss_sum_serial(w, data, spec); }),
        best_ms(reps, [&] { sink += kernels::loss_sum_parallel(w, data, spec, workers); }));
    row(lr ? "accuracy, logistic, 24000 samples" : "accuracy, mlp, 24000 samples",
        best_ms(reps, [&] { sink += static_cast<double>(kernels::count_correct_serial(w, data, spec)); }),
        best_ms(reps, [&] { sink += static_cast<double>(kernels::count_correct_parallel(w, data, spec, workers)); }));
  }

  // Per-device local training fan-out, 10 devices x 1200 samples x 5 epochs.
  const ModelSpec spec{ModelKind::LogisticRegression, 20, 10, 0};
  std::vector<Dataset> devices;
  for (int m = 0; m < 10; ++m) devices.push_back(make_synthetic_dataset(10, 1200, 20, 3.0, s));
  const ModelVector w0(spec.parameter_count(), 0.0);
  std::vector<ModelVector> out(devices.size());
  auto train = [&](int k) {
    kernels::for_each_index(devices.size(), k, [&](std::size_t m) {
      out[m] = local_sgd(w0, devices[m], spec, {0.01, 5, 0}, RngStream(m)).w;
    });
    sink += out[0][0];
  };
  row("local SGD fan-out, 10 devices", best_ms(reps, [&] { train(1); }),
      best_ms(reps, [&] { train(workers); }));

  std::printf("checksum %.6g\n", sink);
  return 0;
}
