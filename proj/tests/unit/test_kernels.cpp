#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "otafl/kernels.hpp"
#include "otafl/learning.hpp"

using namespace otafl;

TEST_CASE("parallel superposition matches the serial reference bit for bit") {
  auto s = substream(1, {StreamKind::MonteCarlo});
  const std::size_t d = 10007;
  std::vector<std::vector<double>> updates(5, std::vector<double>(d));
  for (auto& u : updates)
    for (double& v : u) v = s.normal();
  const std::vector<double> gains{0.1, 0.7, 1.3, 0.0, 2.2};
  const auto noise = substream(1, {StreamKind::Noise, 0, 4});

  std::vector<double> ref(d, 0.0);
  kernels::superpose_serial(updates, gains, 0.3, noise, ref);
  for (int workers : {1, 2, 3, 8}) {
    std::vector<double> y(d, 0.0);
    kernels::superpose_parallel(updates, gains, 0.3, noise, y, workers);
    CHECK(y == ref);
  }
}

TEST_CASE("parallel reductions are independent of the worker count") {
  auto s = substream(2, {StreamKind::MonteCarlo});
  for (const ModelSpec spec : {ModelSpec{ModelKind::LogisticRegression, 8, 4, 0},
                               ModelSpec{ModelKind::OneHiddenLayerMlp, 8, 4, 5}}) {
    const auto data = make_synthetic_dataset(4, 1000, 8, 1.0, s);
    std::vector<double> w(spec.parameter_count());
    for (double& v : w) v = 0.3 * s.normal();

    const double serial = kernels::loss_sum_serial(w, data, spec);
    const double one = kernels::loss_sum_parallel(w, data, spec, 1);
    CHECK(one == doctest::Approx(serial).epsilon(1e-12));
    for (int workers : {2, 3, 8}) CHECK(kernels::loss_sum_parallel(w, data, spec, workers) == one);

    const auto correct = kernels::count_correct_serial(w, data, spec);
    for (int workers : {1, 2, 8}) CHECK(kernels::count_correct_parallel(w, data, spec, workers) == correct);

    CHECK(local_loss(w, data, spec, 1) == local_loss(w, data, spec, 8));
    CHECK(evaluate_accuracy(w, data, spec, 1) == evaluate_accuracy(w, data, spec, 8));
  }
}

TEST_CASE("index fan-out visits every index once") {
  for (int workers : {1, 4}) {
    std::vector<int> hits(257, 0);
    kernels::for_each_index(hits.size(), workers, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("fan-out rethrows the lowest failing index") {
  for (int workers : {1, 4}) {
    try {
      kernels::for_each_index(64, workers, [](std::size_t i) {
        if (i == 9 || i == 40) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "index 9");
    }
  }
}
