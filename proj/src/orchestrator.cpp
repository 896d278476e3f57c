#include "otafl/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "otafl/denoising.hpp"
#include "otafl/error.hpp"
#include "otafl/kernels.hpp"
#include "otafl/scheduling.hpp"

namespace otafl {

double convergence_bound(double delta0, double eta, int T, double tau_min, double tau_max, double L,
                         double G_sq, double zeta_sq) {
  if (!(eta > 0.0) || T <= 0 || !(tau_min > 0.0) || !(tau_max > 0.0)) {
    throw DomainError("convergence_bound: eta, T, tau_min and tau_max must be positive");
  }
  if (tau_min > tau_max) throw DomainError("convergence_bound: tau_min exceeds tau_max");
  return delta0 / (eta * T * tau_min) + L * eta * tau_max * G_sq / 2.0 +
         L * zeta_sq / (2.0 * eta * tau_min);
}

ConvergenceDiagnostics estimate_diagnostics(std::span<const RoundRecord> records, double eta,
                                            double L, double initial_loss) {
  ConvergenceDiagnostics diag;
  diag.initial_loss = initial_loss;
  diag.L = L;
  diag.eta = eta;
  diag.T = static_cast<int>(records.size());
  diag.tau_hat_min = std::numeric_limits<double>::infinity();
  diag.tau_hat_max = 0.0;
  double min_loss = initial_loss;
  double grad_sum = 0.0;
  std::size_t grad_count = 0;
  std::size_t active_rounds = 0;

  for (const auto& r : records) {
    if (r.global_loss) min_loss = std::min(min_loss, *r.global_loss);
    if (r.global_grad_sq) {
      grad_sum += *r.global_grad_sq;
      ++grad_count;
    }
    if (r.N_t == 0) {
      diag.tau_bar_per_round.emplace_back(std::nullopt);
      continue;
    }
    ++active_rounds;
    const double tau_bar =
        std::accumulate(r.tau_per_device.begin(), r.tau_per_device.end(), 0.0) /
        static_cast<double>(r.N_t);
    diag.tau_bar_per_round.emplace_back(tau_bar);
    diag.tau_hat_min = std::min(diag.tau_hat_min, tau_bar);
    diag.tau_hat_max = std::max(diag.tau_hat_max, tau_bar);
    diag.G_sq_hat = std::max(diag.G_sq_hat, r.max_local_grad_sq);
    if (r.error_sq) diag.zeta_sq_hat = std::max(diag.zeta_sq_hat, *r.error_sq);
  }
  if (active_rounds == 0) throw DomainError("diagnostics unavailable: every round was idle");

  diag.f_star_proxy = min_loss;
  diag.delta0 = initial_loss - min_loss;
  if (grad_count > 0) diag.avg_grad_norm_sq = grad_sum / static_cast<double>(grad_count);
  diag.bound_value = convergence_bound(diag.delta0, eta, diag.T, diag.tau_hat_min,
                                       diag.tau_hat_max, L, diag.G_sq_hat, diag.zeta_sq_hat);
  return diag;
}

namespace {

std::vector<DeviceState> make_devices(const SimConfig& c, const EnergyParams& energy,
                                      Dataset& test) {
  std::vector<DeviceState> devices(c.M);
  if (c.dataset == DatasetSource::Synthetic) {
    const auto task = make_synthetic_task(c.model.num_classes, c.model.input_dim, c.separation,
                                          substream(c.seed, {StreamKind::TaskDefinition}));
    for (std::size_t m = 0; m < c.M; ++m) {
      devices[m].data = sample_synthetic(task, c.samples_per_device,
                                         substream(c.seed, {StreamKind::DeviceData, m}));
    }
    test = sample_synthetic(task, c.test_samples, substream(c.seed, {StreamKind::TestData}), true);
  } else {
    const Dataset train = load_idx(c.idx_train_images, c.idx_train_labels);
    test = load_idx(c.idx_test_images, c.idx_test_labels);
    if (train.input_dim != c.model.input_dim) {
      throw ConfigError("input_dim: IDX images have " + std::to_string(train.input_dim) +
                        " pixels, config says " + std::to_string(c.model.input_dim));
    }
    if (c.M * c.samples_per_device > train.size()) {
      throw ConfigError("samples_per_device: " + std::to_string(c.M) + " devices x " +
                        std::to_string(c.samples_per_device) + " exceeds " +
                        std::to_string(train.size()) + " training samples");
    }
    // IID split: one shuffle, then consecutive slices.
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle = substream(c.seed, {StreamKind::DataPartition});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
    }
    for (std::size_t m = 0; m < c.M; ++m) {
      devices[m].data = train.subset(
          std::span<const std::size_t>(order).subspan(m * c.samples_per_device, c.samples_per_device));
    }
  }
  for (auto& dev : devices) {
    dev.battery.level = c.B_init;
    dev.E_comp = computation_energy(energy, dev.data.size());
  }
  return devices;
}

std::vector<const Dataset*> all_datasets(const std::vector<DeviceState>& devices) {
  std::vector<const Dataset*> out;
  out.reserve(devices.size());
  for (const auto& d : devices) out.push_back(&d.data);
  return out;
}

// Uniform subset of `k` indices out of [0, n), returned in ascending order.
std::vector<std::size_t> choose_subset(std::size_t n, std::size_t k, RngStream stream) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + stream.uniform_index(n - i)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct DeviceOutcome {
  ScheduleDecision decision;
  BatteryTransition battery;
  double harvested = 0.0;
  std::vector<double> update;
  std::vector<double> gradient_at_start;  // full local dataset, eval rounds only
  double max_grad_sq = 0.0;
};

}  // namespace

Simulator::Simulator(SimConfig config) : config_(std::move(config)) {
  validate(config_);
  energy_ = config_.energy_params();
  geometry_ = build_geometry(config_.placement(), substream(config_.seed, {StreamKind::Geometry}));
  devices_ = make_devices(config_, energy_, test_);
  w_ = init_model(config_.model, substream(config_.seed, {StreamKind::ModelInit}));
  if (!devices_.empty()) {
    const auto datasets = all_datasets(devices_);
    initial_loss_ = global_loss(w_, datasets, config_.model, config_.workers);
  }
}

RoundRecord Simulator::run_round() {
  const int t = t_++;
  const auto& c = config_;
  const std::size_t M = devices_.size();
  const bool eval_round = (t % c.eval_every == 0) || t == c.T;

  const auto draw = draw_round_channels(geometry_, static_cast<std::uint64_t>(t), c.seed);
  const auto disturbance = interference_components(geometry_, draw, energy_.P_in, c.xi, c.N0);

  std::vector<DeviceOutcome> outcomes(M);
  kernels::for_each_index(M, c.workers, [&](std::size_t m) {
    auto& out = outcomes[m];
    const auto& dev = devices_[m];
    out.harvested = harvested_energy(energy_, draw.h_eh_in_sq.row(m), geometry_.d_mi_in.row(m),
                                     draw.h_eh_out_sq.row(m), geometry_.d_mk_out.row(m));
    const double B = dev.battery.level;
    out.decision = decide(c.scheduler, B, c.E_up, dev.E_comp, dev.data.size());
    out.battery = apply_storage_policy(c.scheduler, out.decision, B, out.harvested, c.B_max);
    if (!out.decision.active) return;

    const SgdOptions opts{c.eta, out.decision.tau, c.batch_size};
    const auto shuffle = substream(c.seed, {StreamKind::Shuffle, m, static_cast<std::uint64_t>(t)});
    try {
      LocalTrainResult res;
      if (out.decision.subset_size < dev.data.size()) {
        const auto idx = choose_subset(dev.data.size(), out.decision.subset_size,
                                       substream(c.seed, {StreamKind::Subset, m, static_cast<std::uint64_t>(t)}));
        res = local_sgd(w_, dev.data.subset(idx), c.model, opts, shuffle);
      } else {
        res = local_sgd(w_, dev.data, c.model, opts, shuffle);
      }
      out.update = model_difference(w_, res.w);
      out.max_grad_sq = res.max_grad_sq;
      if (eval_round) out.gradient_at_start = full_gradient(w_, dev.data, c.model);
    } catch (const NumericalError& e) {
      throw NumericalError("round " + std::to_string(t) + ", device " + std::to_string(m) + ": " +
                           e.what());
    }
  });

  RoundRecord rec;
  rec.t = t;
  rec.phi = disturbance.total();
  rec.harvested.resize(M);
  rec.consumed.resize(M);
  rec.discarded.resize(M);
  rec.battery_after.resize(M);

  std::vector<std::vector<double>> updates;
  ActiveCsi csi;
  csi.phi = rec.phi;
  std::vector<double> grad_num(w_.size(), 0.0);
  double grad_den = 0.0;

  for (std::size_t m = 0; m < M; ++m) {
    auto& out = outcomes[m];
    rec.harvested[m] = out.harvested;
    rec.consumed[m] = out.decision.active ? out.decision.planned_consumption : 0.0;
    rec.discarded[m] = out.battery.discarded;
    rec.battery_after[m] = out.battery.next;
    devices_[m].battery.level = out.battery.next;
    cumulative_consumed_ += rec.consumed[m];
    cumulative_discarded_ += rec.discarded[m];
    if (!out.decision.active) continue;

    rec.active_ids.push_back(m);
    rec.tau_per_device.push_back(out.decision.tau);
    rec.fractions.push_back(out.decision.fraction);
    rec.max_local_grad_sq = std::max(rec.max_local_grad_sq, out.max_grad_sq);
    const double power = path_gain(c.P_up, geometry_.d_m[m], c.xi);
    const double amp = effective_gain(c.P_up, geometry_.d_m[m], c.xi, draw.h_up[m]);
    csi.powers.push_back(power);
    csi.amplitudes.push_back(amp);
    csi.squared_gains.push_back(power * draw.h_up[m] * draw.h_up[m]);
    if (!out.gradient_at_start.empty()) {
      const double n = static_cast<double>(devices_[m].data.size());
      for (std::size_t p = 0; p < grad_num.size(); ++p) grad_num[p] += n * out.gradient_at_start[p];
      grad_den += n;
    }
    updates.push_back(std::move(out.update));
  }
  rec.N_t = rec.active_ids.size();
  rec.cumulative_consumed = cumulative_consumed_;
  rec.cumulative_discarded = cumulative_discarded_;
  rec.cumulative_energy = cumulative_consumed_ + cumulative_discarded_;

  if (eval_round && grad_den > 0.0) {
    for (double& g : grad_num) g /= grad_den;
    rec.global_grad_sq = squared_norm(grad_num);
  }

  if (rec.N_t > 0) {
    const auto s_ideal = ideal_aggregate(updates);
    std::optional<std::vector<double>> s_hat;
    if (c.aggregation == AggregationMode::Ideal) {
      s_hat = s_ideal;
    } else {
      // Devices send tx_scale * dw, so the channel sees scaled amplitudes.
      std::vector<double> tx_gains = csi.amplitudes;
      for (double& g : tx_gains) g *= c.tx_scale;
      const auto y = superpose(updates, tx_gains, disturbance, w_.size(),
                               substream(c.seed, {StreamKind::Noise, 0, static_cast<std::uint64_t>(t)}),
                               c.workers);
      try {
        const double alpha = select_alpha(c.denoise, csi, y, rec.N_t);
        auto est = denoise(y, alpha, rec.N_t);
        for (double& v : est) v /= c.tx_scale;
        rec.alpha = alpha;
        s_hat = std::move(est);
      } catch (const DegenerateChannelError&) {
        // Every amplitude vanished: nothing usable arrived, keep w_t.
      }
    }
    if (s_hat) {
      rec.error_sq = aggregation_error(*s_hat, s_ideal);
      for (std::size_t p = 0; p < w_.size(); ++p) w_[p] -= (*s_hat)[p];
      require_finite(w_, "global model after round " + std::to_string(t));
    }
  }

  if (eval_round) {
    const auto datasets = all_datasets(devices_);
    rec.global_loss = global_loss(w_, datasets, c.model, c.workers);
    rec.test_accuracy = evaluate_accuracy(w_, test_, c.model, c.workers);
  }
  return rec;
}

RunResult run(const SimConfig& config, const RecordSink& sink) {
  Simulator sim(config);
  RunResult result;
  result.initial_loss = sim.initial_loss();
  if (!sim.test_set().empty()) {
    result.initial_accuracy = evaluate_accuracy(sim.model(), sim.test_set(), config.model, config.workers);
  }
  result.records.reserve(static_cast<std::size_t>(config.T));
  for (int t = 1; t <= config.T; ++t) {
    result.records.push_back(sim.run_round());
    if (sink) sink(result.records.back());
  }
  result.final_model = sim.model();
  try {
    result.diagnostics =
        estimate_diagnostics(result.records, config.eta, config.L_smooth, result.initial_loss);
  } catch (const DomainError&) {
    result.diagnostics.reset();
  }
  return result;
}

}  // namespace otafl
