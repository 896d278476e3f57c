#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "otafl/error.hpp"
#include "otafl/rng.hpp"

namespace otafl {

enum class ModelKind { LogisticRegression, OneHiddenLayerMlp };

/// Shape of the trainable model. Parameter layout:
///   logistic: W[K x D], b[K]
///   mlp:      W1[H x D], b1[H], W2[K x H], b2[K]   (tanh hidden layer)
struct ModelSpec {
  ModelKind kind = ModelKind::LogisticRegression;
  std::size_t input_dim = 20;
  std::size_t num_classes = 10;
  std::size_t hidden_units = 32;

  bool operator==(const ModelSpec&) const = default;

  [[nodiscard]] std::size_t parameter_count() const;
  void validate() const;
};

using ModelVector = std::vector<double>;

/// Row-major feature matrix with integer labels in [0, num_classes).
struct Dataset {
  std::size_t input_dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  [[nodiscard]] std::size_t size() const { return labels.size(); }
  [[nodiscard]] bool empty() const { return labels.empty(); }
  [[nodiscard]] std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }
  void push_back(std::span<const double> x, int label);
  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
};

/// Scratch buffers for the per-sample forward/backward pass.
struct Workspace {
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> delta_hidden;
};

/// Cross-entropy of one sample.
double sample_loss(std::span<const double> w, std::span<const double> x, int label,
                   const ModelSpec& spec, Workspace& ws);

/// Cross-entropy of one sample; adds its gradient into `grad`.
double sample_loss_grad(std::span<const double> w, std::span<const double> x, int label,
                        const ModelSpec& spec, std::span<double> grad, Workspace& ws);

/// Argmax class; ties resolve to the lowest index.
int predict(std::span<const double> w, std::span<const double> x, const ModelSpec& spec,
            Workspace& ws);

/// Mean cross-entropy over `data`. Throws DomainError on an empty dataset.
double local_loss(std::span<const double> w, const Dataset& data, const ModelSpec& spec,
                  int workers = 1);

/// Mean gradient over `data` (full batch).
ModelVector full_gradient(std::span<const double> w, const Dataset& data, const ModelSpec& spec);

/// sum(sizes * losses) / sum(sizes).
double weighted_mean_loss(std::span<const std::size_t> sizes, std::span<const double> losses);

/// Dataset-size-weighted mean of local losses over the given datasets.
double global_loss(std::span<const double> w, std::span<const Dataset* const> datasets,
                   const ModelSpec& spec, int workers = 1);

double evaluate_accuracy(std::span<const double> w, const Dataset& test, const ModelSpec& spec,
                         int workers = 1);

ModelVector init_model(const ModelSpec& spec, RngStream stream);

double squared_norm(std::span<const double> v);
void require_finite(std::span<const double> v, const std::string& context);

/// Plain gradient descent driven by an arbitrary gradient callback.
template <class GradFn>
ModelVector gradient_descent(ModelVector w, double eta, int steps, GradFn&& grad) {
  for (int j = 0; j < steps; ++j) {
    const auto g = grad(std::as_const(w));
    for (std::size_t p = 0; p < w.size(); ++p) w[p] -= eta * g[p];
  }
  return w;
}

struct SgdOptions {
  double eta = 0.01;
  int epochs = 1;
  std::size_t batch_size = 0;  // 0 = full batch
};

struct LocalTrainResult {
  ModelVector w;
  double max_grad_sq = 0.0;  // largest ||grad||^2 seen over the steps
  std::vector<double> step_gradient_sum;  // sum of the step gradients, for checks
};

/// `epochs` passes of gradient descent over `data`. Full-batch mode takes one
/// step per epoch; mini-batch mode reshuffles each epoch from `shuffle`.
/// Throws NumericalError on a non-finite gradient.
LocalTrainResult local_sgd(const ModelVector& w0, const Dataset& data, const ModelSpec& spec,
                           const SgdOptions& options, RngStream shuffle);

/// w_t - w_tau (initial minus trained).
std::vector<double> model_difference(std::span<const double> w_t, std::span<const double> w_tau);

struct SyntheticTask {
  std::size_t num_classes = 0;
  std::size_t input_dim = 0;
  double separation = 0.0;
  std::vector<std::vector<double>> means;
};

/// Class means at distance `separation` from the origin in random directions.
SyntheticTask make_synthetic_task(std::size_t num_classes, std::size_t input_dim,
                                  double separation, RngStream stream);

/// Samples x = mean[y] + N(0, I). Labels are uniform, or round-robin when `balanced`.
Dataset sample_synthetic(const SyntheticTask& task, std::size_t samples, RngStream stream,
                         bool balanced = false);

Dataset make_synthetic_dataset(std::size_t num_classes, std::size_t samples,
                               std::size_t input_dim, double separation, RngStream stream);

/// Reads an IDX image/label pair (MNIST layout). Pixels are scaled to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace otafl
