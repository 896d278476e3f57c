#include "otafl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otafl/kernels.hpp"

namespace otafl {

std::size_t ModelSpec::parameter_count() const {
  switch (kind) {
    case ModelKind::LogisticRegression:
      return num_classes * (input_dim + 1);
    case ModelKind::OneHiddenLayerMlp:
      return hidden_units * (input_dim + 1) + num_classes * (hidden_units + 1);
  }
  return 0;
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw ConfigError("input_dim must be positive");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (kind == ModelKind::OneHiddenLayerMlp && hidden_units == 0) {
    throw ConfigError("hidden_units must be positive for the mlp model");
  }
}

void Dataset::push_back(std::span<const double> x, int label) {
  if (x.size() != input_dim) throw ContractViolation("Dataset::push_back: feature size mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.input_dim = input_dim;
  out.features.reserve(indices.size() * input_dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(sample(i), labels[i]);
  return out;
}

namespace {

// Writes log-softmax of `logits` in place and returns -log p[label].
double log_softmax_loss(std::vector<double>& logits, int label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (double& v : logits) v -= lse;
  return -logits[static_cast<std::size_t>(label)];
}

void check_label(int label, const ModelSpec& spec) {
  if (label < 0 || static_cast<std::size_t>(label) >= spec.num_classes) {
    throw ContractViolation("label outside [0, num_classes)");
  }
}

// Forward pass; leaves logits (and the tanh hidden layer for the mlp) in ws.
void forward(std::span<const double> w, std::span<const double> x, const ModelSpec& spec,
             Workspace& ws) {
  const std::size_t D = spec.input_dim;
  const std::size_t K = spec.num_classes;
  ws.logits.assign(K, 0.0);
  if (spec.kind == ModelKind::LogisticRegression) {
    const double* W = w.data();
    const double* b = W + K * D;
    for (std::size_t k = 0; k < K; ++k) {
      double acc = b[k];
      const double* row = W + k * D;
      for (std::size_t j = 0; j < D; ++j) acc += row[j] * x[j];
      ws.logits[k] = acc;
    }
    return;
  }
  const std::size_t H = spec.hidden_units;
  const double* W1 = w.data();
  const double* b1 = W1 + H * D;
  const double* W2 = b1 + H;
  const double* b2 = W2 + K * H;
  ws.hidden.assign(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    double acc = b1[h];
    const double* row = W1 + h * D;
    for (std::size_t j = 0; j < D; ++j) acc += row[j] * x[j];
    ws.hidden[h] = std::tanh(acc);
  }
  for (std::size_t k = 0; k < K; ++k) {
    double acc = b2[k];
    const double* row = W2 + k * H;
    for (std::size_t h = 0; h < H; ++h) acc += row[h] * ws.hidden[h];
    ws.logits[k] = acc;
  }
}

}  // namespace

double sample_loss(std::span<const double> w, std::span<const double> x, int label,
                   const ModelSpec& spec, Workspace& ws) {
  check_label(label, spec);
  forward(w, x, spec, ws);
  return log_softmax_loss(ws.logits, label);
}

double sample_loss_grad(std::span<const double> w, std::span<const double> x, int label,
                        const ModelSpec& spec, std::span<double> grad, Workspace& ws) {
  check_label(label, spec);
  forward(w, x, spec, ws);
  const double loss = log_softmax_loss(ws.logits, label);
  // logits now hold log-probabilities; turn them into dL/dlogit = p - onehot.
  for (double& v : ws.logits) v = std::exp(v);
  ws.logits[static_cast<std::size_t>(label)] -= 1.0;

  const std::size_t D = spec.input_dim;
  const std::size_t K = spec.num_classes;
  if (spec.kind == ModelKind::LogisticRegression) {
    double* gW = grad.data();
    double* gb = gW + K * D;
    for (std::size_t k = 0; k < K; ++k) {
      const double e = ws.logits[k];
      double* row = gW + k * D;
      for (std::size_t j = 0; j < D; ++j) row[j] += e * x[j];
      gb[k] += e;
    }
    return loss;
  }

  const std::size_t H = spec.hidden_units;
  const double* W2 = w.data() + H * D + H;
  double* gW1 = grad.data();
  double* gb1 = gW1 + H * D;
  double* gW2 = gb1 + H;
  double* gb2 = gW2 + K * H;
  ws.delta_hidden.assign(H, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double e = ws.logits[k];
    double* row = gW2 + k * H;
    const double* wrow = W2 + k * H;
    for (std::size_t h = 0; h < H; ++h) {
      row[h] += e * ws.hidden[h];
      ws.delta_hidden[h] += e * wrow[h];
    }
    gb2[k] += e;
  }
  for (std::size_t h = 0; h < H; ++h) {
    const double a = ws.hidden[h];
    const double dz = ws.delta_hidden[h] * (1.0 - a * a);
    double* row = gW1 + h * D;
    for (std::size_t j = 0; j < D; ++j) row[j] += dz * x[j];
    gb1[h] += dz;
  }
  return loss;
}

int predict(std::span<const double> w, std::span<const double> x, const ModelSpec& spec,
            Workspace& ws) {
  forward(w, x, spec, ws);
  std::size_t best = 0;
  for (std::size_t k = 1; k < ws.logits.size(); ++k) {
    if (ws.logits[k] > ws.logits[best]) best = k;
  }
  return static_cast<int>(best);
}

double local_loss(std::span<const double> w, const Dataset& data, const ModelSpec& spec,
                  int workers) {
  if (data.empty()) throw DomainError("local_loss: empty dataset");
  return kernels::loss_sum_parallel(w, data, spec, workers) / static_cast<double>(data.size());
}

ModelVector full_gradient(std::span<const double> w, const Dataset& data, const ModelSpec& spec) {
  if (data.empty()) throw DomainError("full_gradient: empty dataset");
  ModelVector grad(w.size(), 0.0);
  Workspace ws;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sample_loss_grad(w, data.sample(i), data.labels[i], spec, grad, ws);
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  for (double& g : grad) g *= inv;
  return grad;
}

double weighted_mean_loss(std::span<const std::size_t> sizes, std::span<const double> losses) {
  if (sizes.size() != losses.size()) throw ContractViolation("weighted_mean_loss: size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < sizes.size(); ++m) {
    num += static_cast<double>(sizes[m]) * losses[m];
    den += static_cast<double>(sizes[m]);
  }
  if (!(den > 0.0)) throw DomainError("global_loss: all datasets empty");
  return num / den;
}

double global_loss(std::span<const double> w, std::span<const Dataset* const> datasets,
                   const ModelSpec& spec, int workers) {
  std::vector<std::size_t> sizes;
  std::vector<double> losses;
  for (const Dataset* d : datasets) {
    if (d->empty()) continue;
    sizes.push_back(d->size());
    losses.push_back(local_loss(w, *d, spec, workers));
  }
  return weighted_mean_loss(sizes, losses);
}

double evaluate_accuracy(std::span<const double> w, const Dataset& test, const ModelSpec& spec,
                         int workers) {
  if (test.empty()) throw DomainError("evaluate_accuracy: empty test set");
  return static_cast<double>(kernels::count_correct_parallel(w, test, spec, workers)) /
         static_cast<double>(test.size());
}

ModelVector init_model(const ModelSpec& spec, RngStream stream) {
  ModelVector w(spec.parameter_count(), 0.0);
  if (spec.kind == ModelKind::LogisticRegression) return w;
  const std::size_t D = spec.input_dim;
  const std::size_t H = spec.hidden_units;
  const std::size_t K = spec.num_classes;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(D));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(H));
  for (std::size_t p = 0; p < H * D; ++p) w[p] = s1 * stream.normal();
  const std::size_t w2 = H * D + H;
  for (std::size_t p = 0; p < K * H; ++p) w[w2 + p] = s2 * stream.normal();
  return w;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void require_finite(std::span<const double> v, const std::string& context) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericalError(context + ": non-finite value at index " + std::to_string(i));
    }
  }
}

LocalTrainResult local_sgd(const ModelVector& w0, const Dataset& data, const ModelSpec& spec,
                           const SgdOptions& options, RngStream shuffle) {
  if (options.epochs < 1) throw ContractViolation("local_sgd: epochs must be >= 1");
  if (options.eta < 0.0) throw ContractViolation("local_sgd: negative learning rate");
  if (data.empty()) throw DomainError("local_sgd: empty dataset");

  LocalTrainResult out;
  out.w = w0;
  out.step_gradient_sum.assign(w0.size(), 0.0);
  ModelVector grad(w0.size());
  Workspace ws;

  auto step = [&](std::span<const std::size_t> batch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    if (batch.empty()) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        sample_loss_grad(out.w, data.sample(i), data.labels[i], spec, grad, ws);
      }
    } else {
      for (std::size_t i : batch) {
        sample_loss_grad(out.w, data.sample(i), data.labels[i], spec, grad, ws);
      }
    }
    const double n = static_cast<double>(batch.empty() ? data.size() : batch.size());
    for (double& g : grad) g /= n;
    require_finite(grad, "local_sgd gradient");
    out.max_grad_sq = std::max(out.max_grad_sq, squared_norm(grad));
    for (std::size_t p = 0; p < grad.size(); ++p) {
      out.w[p] -= options.eta * grad[p];
      out.step_gradient_sum[p] += grad[p];
    }
  };

  if (options.batch_size == 0 || options.batch_size >= data.size()) {
    for (int e = 0; e < options.epochs; ++e) step({});
    return out;
  }

  std::vector<std::size_t> order(data.size());
  for (int e = 0; e < options.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t len = std::min(options.batch_size, order.size() - start);
      step(std::span<const std::size_t>(order).subspan(start, len));
    }
  }
  return out;
}

std::vector<double> model_difference(std::span<const double> w_t, std::span<const double> w_tau) {
  if (w_t.size() != w_tau.size()) throw ContractViolation("model_difference: length mismatch");
  std::vector<double> diff(w_t.size());
  for (std::size_t p = 0; p < w_t.size(); ++p) diff[p] = w_t[p] - w_tau[p];
  return diff;
}

SyntheticTask make_synthetic_task(std::size_t num_classes, std::size_t input_dim,
                                  double separation, RngStream stream) {
  if (!(separation >= 0.0)) throw ConfigError("separation must be >= 0");
  SyntheticTask task{num_classes, input_dim, separation, {}};
  task.means.assign(num_classes, std::vector<double>(input_dim, 0.0));
  for (auto& mu : task.means) {
    double norm = 0.0;
    for (double& v : mu) {
      v = stream.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : mu) v = norm > 0.0 ? separation * v / norm : 0.0;
  }
  return task;
}

Dataset sample_synthetic(const SyntheticTask& task, std::size_t samples, RngStream stream,
                         bool balanced) {
  Dataset out;
  out.input_dim = task.input_dim;
  out.features.reserve(samples * task.input_dim);
  out.labels.reserve(samples);
  std::vector<double> x(task.input_dim);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t label = balanced ? i % task.num_classes : stream.uniform_index(task.num_classes);
    for (std::size_t j = 0; j < task.input_dim; ++j) x[j] = task.means[label][j] + stream.normal();
    out.push_back(x, static_cast<int>(label));
  }
  return out;
}

Dataset make_synthetic_dataset(std::size_t num_classes, std::size_t samples,
                               std::size_t input_dim, double separation, RngStream stream) {
  const auto task = make_synthetic_task(num_classes, input_dim, separation, stream);
  return sample_synthetic(task, samples, RngStream(mix64(stream.key() + 1)));
}

}  // namespace otafl
