#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "otafl/error.hpp"
#include "otafl/learning.hpp"

using namespace otafl;
namespace fs = std::filesystem;

namespace {

ModelSpec logistic(std::size_t D, std::size_t K) {
  return {ModelKind::LogisticRegression, D, K, 0};
}

ModelSpec mlp(std::size_t D, std::size_t K, std::size_t H) {
  return {ModelKind::OneHiddenLayerMlp, D, K, H};
}

ModelVector random_vector(std::size_t n, RngStream& s, double scale = 1.0) {
  ModelVector v(n);
  for (double& x : v) x = scale * s.normal();
  return v;
}

ModelVector train_centralised(const Dataset& data, const ModelSpec& spec, int steps, double eta) {
  auto res = local_sgd(ModelVector(spec.parameter_count(), 0.0), data, spec, {eta, steps, 0},
                       substream(1, {StreamKind::Shuffle}));
  return res.w;
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

struct IdxFiles {
  fs::path images, labels;
};

IdxFiles write_idx(const std::string& tag, std::uint32_t image_magic, std::uint32_t count,
                   std::uint32_t label_count, const std::vector<unsigned char>& label_bytes,
                   std::size_t pixel_bytes) {
  const auto dir = fs::temp_directory_path() / "otafl_idx_test";
  fs::create_directories(dir);
  IdxFiles f{dir / (tag + "-images"), dir / (tag + "-labels")};
  std::ofstream im(f.images, std::ios::binary);
  write_be32(im, image_magic);
  write_be32(im, count);
  write_be32(im, 28);
  write_be32(im, 28);
  const std::vector<char> pixels(pixel_bytes, 0);
  im.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  std::ofstream lb(f.labels, std::ios::binary);
  write_be32(lb, 0x801);
  write_be32(lb, label_count);
  lb.write(reinterpret_cast<const char*>(label_bytes.data()),
           static_cast<std::streamsize>(label_bytes.size()));
  return f;
}

}  // namespace

TEST_CASE("parameter counts") {
  CHECK(logistic(20, 10).parameter_count() == 210);
  CHECK(mlp(20, 10, 32).parameter_count() == 32 * 20 + 32 + 10 * 32 + 10);
}

TEST_CASE("loss at the zero model is ln K") {
  Dataset binary{2, {}, {}};
  binary.push_back(std::vector<double>{1, 2}, 0);
  binary.push_back(std::vector<double>{-1, 0.5}, 1);
  const auto spec2 = logistic(2, 2);
  CHECK(local_loss(ModelVector(spec2.parameter_count(), 0.0), binary, spec2) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));

  auto s = substream(1, {StreamKind::MonteCarlo});
  const auto spec = logistic(5, 7);
  const auto data = make_synthetic_dataset(7, 50, 5, 1.0, s);
  CHECK(local_loss(ModelVector(spec.parameter_count(), 0.0), data, spec) ==
        doctest::Approx(std::log(7.0)).epsilon(1e-14));

  CHECK_THROWS_AS(local_loss(ModelVector(spec.parameter_count(), 0.0), Dataset{5, {}, {}}, spec),
                  DomainError);
}

TEST_CASE("large-margin separable data has near-zero loss") {
  Dataset d{1, {}, {}};
  for (int i = 1; i <= 10; ++i) {
    d.push_back(std::vector<double>{static_cast<double>(i)}, 1);
    d.push_back(std::vector<double>{-static_cast<double>(i)}, 0);
  }
  const auto spec = logistic(1, 2);
  // Layout: W[K x D] then b[K].
  const ModelVector w{-20.0, 20.0, 0.0, 0.0};
  CHECK(local_loss(w, d, spec) < 1e-3);
  CHECK(evaluate_accuracy(w, d, spec) == 1.0);
}

TEST_CASE("global loss is the size-weighted mean") {
  const std::vector<std::size_t> sizes{100, 300};
  const std::vector<double> losses{1.0, 2.0};
  CHECK(weighted_mean_loss(sizes, losses) == 1.75);
  const std::vector<std::size_t> equal{5, 5, 5};
  const std::vector<double> l3{1.0, 2.0, 6.0};
  CHECK(weighted_mean_loss(equal, l3) == doctest::Approx(3.0).epsilon(1e-15));

  auto s = substream(2, {StreamKind::MonteCarlo});
  const auto spec = logistic(4, 3);
  const auto a = make_synthetic_dataset(3, 40, 4, 2.0, s);
  const auto w = random_vector(spec.parameter_count(), s, 0.3);
  const std::vector<const Dataset*> one{&a};
  CHECK(global_loss(w, one, spec) == doctest::Approx(local_loss(w, a, spec)).epsilon(1e-14));
  const Dataset empty{4, {}, {}};
  const std::vector<const Dataset*> none{&empty};
  CHECK_THROWS_AS(global_loss(w, none, spec), DomainError);
}

TEST_CASE("quadratic descent hook") {
  auto grad = [](const ModelVector& w) { return w; };
  CHECK(gradient_descent({1.0}, 0.1, 1, grad)[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(gradient_descent({1.0}, 0.1, 2, grad)[0] == doctest::Approx(0.81).epsilon(1e-15));
  CHECK(gradient_descent({1.0}, 0.0, 5, grad)[0] == 1.0);
  const auto w = gradient_descent({1.0}, 0.1, 1, grad);
  CHECK(model_difference(ModelVector{1.0}, w)[0] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("local SGD composes and its difference is eta times the step gradients") {
  auto s = substream(3, {StreamKind::MonteCarlo});
  for (const auto& spec : {logistic(6, 4), mlp(6, 4, 5)}) {
    const auto data = make_synthetic_dataset(4, 60, 6, 1.5, s);
    const auto w0 = random_vector(spec.parameter_count(), s, 0.2);
    const double eta = 0.05;
    const auto shuffle = substream(3, {StreamKind::Shuffle});

    const auto three = local_sgd(w0, data, spec, {eta, 3, 0}, shuffle);
    auto w = w0;
    for (int k = 0; k < 3; ++k) w = local_sgd(w, data, spec, {eta, 1, 0}, shuffle).w;
    CHECK(w == three.w);

    const auto diff = model_difference(w0, three.w);
    for (std::size_t p = 0; p < diff.size(); ++p) {
      CHECK(diff[p] == doctest::Approx(eta * three.step_gradient_sum[p]).epsilon(1e-10));
    }

    const auto once = local_sgd(w0, data, spec, {eta, 1, 0}, shuffle);
    const auto g = full_gradient(w0, data, spec);
    const auto d1 = model_difference(w0, once.w);
    for (std::size_t p = 0; p < g.size(); ++p) {
      CHECK(d1[p] == doctest::Approx(eta * g[p]).epsilon(1e-10));
    }

    const auto frozen = local_sgd(w0, data, spec, {0.0, 2, 0}, shuffle);
    CHECK(frozen.w == w0);
  }
}

TEST_CASE("local SGD preconditions") {
  const auto spec = logistic(2, 2);
  Dataset d{2, {}, {}};
  const ModelVector w(spec.parameter_count(), 0.0);
  CHECK_THROWS_AS(local_sgd(w, d, spec, {0.1, 1, 0}, RngStream(1)), DomainError);
  d.push_back(std::vector<double>{1, 1}, 0);
  CHECK_THROWS_AS(local_sgd(w, d, spec, {0.1, 0, 0}, RngStream(1)), ContractViolation);
  CHECK_THROWS_AS(model_difference(ModelVector{1, 2}, ModelVector{1}), ContractViolation);
  ModelVector bad = w;
  bad[0] = std::nan("");
  CHECK_THROWS_AS(local_sgd(bad, d, spec, {0.1, 1, 0}, RngStream(1)), NumericalError);
}

TEST_CASE("mini-batch mode reshuffles reproducibly") {
  auto s = substream(4, {StreamKind::MonteCarlo});
  const auto spec = logistic(3, 3);
  const auto data = make_synthetic_dataset(3, 50, 3, 2.0, s);
  const ModelVector w0(spec.parameter_count(), 0.0);
  const auto a = local_sgd(w0, data, spec, {0.1, 2, 8}, substream(4, {StreamKind::Shuffle, 0, 1}));
  const auto b = local_sgd(w0, data, spec, {0.1, 2, 8}, substream(4, {StreamKind::Shuffle, 0, 1}));
  const auto c = local_sgd(w0, data, spec, {0.1, 2, 8}, substream(4, {StreamKind::Shuffle, 0, 2}));
  CHECK(a.w == b.w);
  CHECK(a.w != c.w);
}

TEST_CASE("loss does not depend on sample order") {
  auto s = substream(5, {StreamKind::MonteCarlo});
  const auto spec = mlp(4, 3, 6);
  const auto data = make_synthetic_dataset(3, 80, 4, 1.0, s);
  std::vector<std::size_t> reversed(data.size());
  for (std::size_t i = 0; i < reversed.size(); ++i) reversed[i] = data.size() - 1 - i;
  const auto w = random_vector(spec.parameter_count(), s, 0.5);
  CHECK(local_loss(w, data.subset(reversed), spec) ==
        doctest::Approx(local_loss(w, data, spec)).epsilon(1e-13));
}

TEST_CASE("accuracy") {
  const auto spec = logistic(2, 3);
  Dataset zeros{2, {}, {}};
  for (int i = 0; i < 5; ++i) zeros.push_back(std::vector<double>{1.0 * i, -1.0}, 0);
  // Bias favouring class 0.
  ModelVector w(spec.parameter_count(), 0.0);
  w[6] = 1.0;
  CHECK(evaluate_accuracy(w, zeros, spec) == 1.0);

  // Zero model predicts the lowest index, so a balanced set scores 1/K.
  Dataset balanced{2, {}, {}};
  for (int i = 0; i < 30; ++i) balanced.push_back(std::vector<double>{0.3 * i, 1.0}, i % 3);
  CHECK(evaluate_accuracy(ModelVector(spec.parameter_count(), 0.0), balanced, spec) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  auto s = substream(6, {StreamKind::MonteCarlo});
  for (int t = 0; t < 20; ++t) {
    const double acc = evaluate_accuracy(random_vector(spec.parameter_count(), s), balanced, spec);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
  }
  CHECK_THROWS_AS(evaluate_accuracy(w, Dataset{2, {}, {}}, spec), DomainError);
}

TEST_CASE("synthetic task difficulty follows the separation") {
  const std::size_t K = 5, D = 10;
  const auto spec = logistic(D, K);
  auto task_seed = substream(7, {StreamKind::TaskDefinition});

  const auto flat = make_synthetic_task(K, D, 0.0, task_seed);
  const auto flat_train = sample_synthetic(flat, 2000, substream(7, {StreamKind::DeviceData}));
  const auto flat_test = sample_synthetic(flat, 2000, substream(7, {StreamKind::TestData}), true);
  const auto w_flat = train_centralised(flat_train, spec, 300, 0.5);
  CHECK(evaluate_accuracy(w_flat, flat_test, spec) < 1.0 / K + 0.05);

  const auto easy = make_synthetic_task(K, D, 8.0, task_seed);
  const auto easy_train = sample_synthetic(easy, 2000, substream(7, {StreamKind::DeviceData}));
  const auto easy_test = sample_synthetic(easy, 2000, substream(7, {StreamKind::TestData}), true);
  const auto w_easy = train_centralised(easy_train, spec, 300, 0.5);
  CHECK(evaluate_accuracy(w_easy, easy_test, spec) > 0.95);

  const auto again = sample_synthetic(easy, 2000, substream(7, {StreamKind::DeviceData}));
  CHECK(again.features == easy_train.features);
  CHECK(again.labels == easy_train.labels);
}

TEST_CASE("analytic gradients match central differences") {
  auto s = substream(8, {StreamKind::MonteCarlo});
  const double h = 1e-5;
  for (const auto& spec : {logistic(5, 4), mlp(5, 4, 6)}) {
    Workspace ws;
    for (int trial = 0; trial < 10; ++trial) {
      const auto w = random_vector(spec.parameter_count(), s, 0.5);
      const auto x = random_vector(spec.input_dim, s);
      const int label = static_cast<int>(s.uniform_index(spec.num_classes));
      std::vector<double> grad(w.size(), 0.0);
      sample_loss_grad(w, x, label, spec, grad, ws);
      for (std::size_t p = 0; p < w.size(); ++p) {
        auto wp = w, wm = w;
        wp[p] += h;
        wm[p] -= h;
        const double fd =
            (sample_loss(wp, x, label, spec, ws) - sample_loss(wm, x, label, spec, ws)) / (2 * h);
        CHECK(std::abs(fd - grad[p]) <= 1e-4 * std::max(1.0, std::abs(grad[p])));
      }
    }
  }
}

TEST_CASE("IDX ingestion") {
  const std::vector<unsigned char> labels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto good = write_idx("good", 0x803, 10, 10, labels, 10 * 784);
  const auto d = load_idx(good.images.string(), good.labels.string());
  CHECK(d.size() == 10);
  CHECK(d.input_dim == 784);
  for (double v : d.features) CHECK(v == 0.0);
  CHECK(d.labels[9] == 9);

  const auto bad_magic = write_idx("magic", 0x804, 10, 10, labels, 10 * 784);
  try {
    load_idx(bad_magic.images.string(), bad_magic.labels.string());
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
    CHECK(std::string(e.what()).find(bad_magic.images.string()) != std::string::npos);
  }

  const auto truncated = write_idx("short", 0x803, 10, 10, labels, 9 * 784);
  CHECK_THROWS_AS(load_idx(truncated.images.string(), truncated.labels.string()), IngestionError);

  const auto mismatch = write_idx("count", 0x803, 10, 9, {0, 1, 2, 3, 4, 5, 6, 7, 8}, 10 * 784);
  CHECK_THROWS_AS(load_idx(mismatch.images.string(), mismatch.labels.string()), IngestionError);

  const auto out_of_range = write_idx("range", 0x803, 10, 10, {0, 1, 2, 3, 4, 5, 6, 7, 8, 12}, 10 * 784);
  CHECK_THROWS_AS(load_idx(out_of_range.images.string(), out_of_range.labels.string()),
                  IngestionError);

  CHECK_THROWS_AS(load_idx("/nonexistent/images", "/nonexistent/labels"), IngestionError);
}
