#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/denoising.hpp"
#include "otafl/error.hpp"
#include "otafl/metrics_io.hpp"
#include "otafl/orchestrator.hpp"

using namespace otafl;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.T = 5;
  c.M = 4;
  c.I = 10;
  c.K = 10;
  c.samples_per_device = 200;
  c.test_samples = 300;
  return c;
}

std::string serialise(const RunResult& r) {
  std::string out;
  for (const auto& rec : r.records) out += record_to_json(rec) + "\n";
  return out;
}

bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("empty batteries and no harvest leave every round idle") {
  auto c = small_config();
  c.B_init = 0;
  c.P_in = 0;
  c.P_out = 0;
  Simulator sim(c);
  const auto w0 = sim.model();
  for (int t = 1; t <= 3; ++t) {
    const auto r = sim.run_round();
    CHECK(r.t == t);
    CHECK(r.N_t == 0);
    CHECK(r.active_ids.empty());
    CHECK_FALSE(r.alpha.has_value());
    CHECK_FALSE(r.error_sq.has_value());
    CHECK(r.cumulative_energy == 0.0);
    CHECK(sim.model() == w0);
  }
  CHECK_THROWS_AS(estimate_diagnostics(run(c).records, c.eta, c.L_smooth, 0.0), DomainError);
  CHECK_FALSE(run(c).diagnostics.has_value());
}

TEST_CASE("a single noiseless device is applied exactly") {
  auto c = small_config();
  c.M = 1;
  c.I = 0;
  c.N0 = 0;
  c.denoise = DenoisePolicy::FadingBased;
  Simulator sim(c);
  for (int t = 1; t <= 5; ++t) {
    const auto w_t = sim.model();
    const auto r = sim.run_round();
    REQUIRE(r.N_t == 1);
    const auto trained = local_sgd(w_t, sim.devices()[0].data, c.model,
                                   {c.eta, r.tau_per_device[0], 0},
                                   substream(c.seed, {StreamKind::Shuffle, 0, static_cast<std::uint64_t>(t)}));
    const auto dw = model_difference(w_t, trained.w);
    for (std::size_t p = 0; p < dw.size(); ++p) {
      CHECK(std::abs(sim.model()[p] - (w_t[p] - dw[p])) < 1e-12);
    }
    CHECK(*r.error_sq < 1e-20);
    CHECK(r.phi == 0.0);
  }
}

TEST_CASE("identical devices aggregate to the single-device update") {
  SimConfig c = small_config();
  auto s = substream(2, {StreamKind::MonteCarlo});
  const auto data = make_synthetic_dataset(c.model.num_classes, 100, c.model.input_dim, 3.0, s);
  const ModelVector w(c.model.parameter_count(), 0.0);
  const auto trained = local_sgd(w, data, c.model, {0.05, 2, 0}, RngStream(1));
  const auto dw = model_difference(w, trained.w);
  const std::vector<std::vector<double>> both{dw, dw};
  const std::vector<double> amps{0.3, 0.9};
  const auto y = superpose(both, amps, Disturbance{{}, 0.0}, dw.size(), RngStream(2));
  const ActiveCsi csi{amps, {0.09, 0.81}, {1, 1}, 0.0};
  const auto s_hat = denoise(y, select_alpha(DenoisePolicy::FadingBased, csi, y, 2), 2);
  for (std::size_t p = 0; p < dw.size(); ++p) {
    CHECK(std::abs(s_hat[p] - dw[p]) <= 1e-15 + 1e-12 * std::abs(dw[p]));
  }
}

TEST_CASE("ideal aggregation applies the mean update") {
  auto c = small_config();
  c.aggregation = AggregationMode::Ideal;
  Simulator sim(c);
  for (int t = 1; t <= 3; ++t) {
    const auto w_t = sim.model();
    const auto r = sim.run_round();
    REQUIRE(r.N_t == c.M);
    std::vector<double> mean(w_t.size(), 0.0);
    for (std::size_t k = 0; k < r.N_t; ++k) {
      const auto m = r.active_ids[k];
      const auto w = local_sgd(w_t, sim.devices()[m].data, c.model, {c.eta, r.tau_per_device[k], 0},
                               substream(c.seed, {StreamKind::Shuffle, m, static_cast<std::uint64_t>(t)}))
                         .w;
      const auto dw = model_difference(w_t, w);
      for (std::size_t p = 0; p < dw.size(); ++p) mean[p] += dw[p] / static_cast<double>(r.N_t);
    }
    for (std::size_t p = 0; p < mean.size(); ++p) {
      CHECK(sim.model()[p] - w_t[p] == doctest::Approx(-mean[p]).epsilon(1e-9));
    }
    CHECK(*r.error_sq == 0.0);
  }
}

TEST_CASE("zero rounds return the initial model") {
  auto c = small_config();
  c.T = 0;
  const auto r = run(c);
  CHECK(r.records.empty());
  CHECK(r.final_model == Simulator(c).model());
  CHECK_FALSE(r.diagnostics.has_value());
}

TEST_CASE("runs are reproducible and independent of the worker count") {
  auto c = small_config();
  c.T = 4;
  c.B_init = 0.01;
  const auto a = serialise(run(c));
  const auto b = serialise(run(c));
  c.workers = 4;
  const auto d = serialise(run(c));
  CHECK(a == b);
  CHECK(a == d);
  c.seed = 2;
  c.workers = 1;
  CHECK(serialise(run(c)) != a);
}

TEST_CASE("energy ledger holds every round") {
  for (auto variant : {SchedulerVariant::Adaptive, SchedulerVariant::NonAdaptiveWithStorage,
                       SchedulerVariant::NonAdaptiveNoStorage}) {
    auto c = small_config();
    c.T = 25;
    c.M = 6;
    c.B_init = 0.004;
    c.B_max = 0.03;
    c.E_up = 2e-3;
    c.scheduler.variant = variant;
    const auto result = run(c);
    std::vector<double> B(c.M, c.B_init);
    double last_cumulative = 0.0;
    bool saw_fraction = false;
    for (const auto& r : result.records) {
      CHECK(r.N_t == r.active_ids.size());
      CHECK(r.N_t <= c.M);
      CHECK(r.cumulative_energy >= last_cumulative);
      last_cumulative = r.cumulative_energy;
      for (std::size_t m = 0; m < c.M; ++m) {
        const double expected = variant == SchedulerVariant::NonAdaptiveNoStorage
                                    ? std::min(c.B_max, r.harvested[m])
                                    : std::min(c.B_max, B[m] - r.consumed[m] + r.harvested[m]);
        CHECK(rel_close(r.battery_after[m], expected, 1e-12));
        CHECK(r.consumed[m] <= B[m]);
        CHECK(r.battery_after[m] >= 0.0);
        CHECK(r.battery_after[m] <= c.B_max);
        B[m] = r.battery_after[m];
      }
      for (double f : r.fractions) saw_fraction |= f < 1.0;
    }
    if (variant == SchedulerVariant::Adaptive) CHECK(saw_fraction);
  }
}

TEST_CASE("a dead uplink leaves the model in place") {
  auto c = small_config();
  c.P_up = 0;
  c.denoise = DenoisePolicy::FadingBased;
  Simulator sim(c);
  const auto w0 = sim.model();
  const auto r = sim.run_round();
  CHECK(r.N_t == c.M);
  CHECK_FALSE(r.alpha.has_value());
  CHECK(sim.model() == w0);
}

TEST_CASE("divergence is reported with its round") {
  auto c = small_config();
  c.eta = 1.7e308;
  c.aggregation = AggregationMode::Ideal;
  Simulator sim(c);
  try {
    for (int t = 0; t < 5; ++t) sim.run_round();
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("round") != std::string::npos);
  }
}

TEST_CASE("convergence bound") {
  CHECK(convergence_bound(1, 0.01, 100, 2, 2, 1, 1, 0) == doctest::Approx(0.51).epsilon(1e-12));
  const double first = 1.0 / (0.01 * 100 * 2);
  CHECK(convergence_bound(1, 0.01, 200, 2, 2, 1, 1, 0) ==
        doctest::Approx(0.51 - first / 2).epsilon(1e-12));
  CHECK(convergence_bound(1, 0.01, 1'000'000'000, 2, 2, 1, 1, 0) ==
        doctest::Approx(0.01).epsilon(1e-6));
  CHECK_THROWS_AS(convergence_bound(1, 0.0, 100, 2, 2, 1, 1, 0), DomainError);
  CHECK_THROWS_AS(convergence_bound(1, 0.01, 0, 2, 2, 1, 1, 0), DomainError);
  CHECK_THROWS_AS(convergence_bound(1, 0.01, 100, 0, 2, 1, 1, 0), DomainError);
  CHECK_THROWS_AS(convergence_bound(1, 0.01, 100, 3, 2, 1, 1, 0), DomainError);
}

TEST_CASE("diagnostics from records") {
  RoundRecord one;
  one.t = 1;
  one.N_t = 1;
  one.active_ids = {0};
  one.tau_per_device = {3};
  one.error_sq = 0.5;
  one.global_loss = 1.0;
  one.max_local_grad_sq = 2.0;
  const std::vector<RoundRecord> single{one};
  const auto d1 = estimate_diagnostics(single, 0.01, 1.0, 2.0);
  CHECK(d1.tau_hat_min == 3.0);
  CHECK(d1.tau_hat_max == 3.0);
  CHECK(*d1.tau_bar_per_round[0] == 3.0);
  CHECK(d1.delta0 == 1.0);
  CHECK(d1.G_sq_hat == 2.0);

  RoundRecord two = one;
  two.t = 2;
  two.N_t = 2;
  two.active_ids = {0, 1};
  two.tau_per_device = {1, 3};
  two.error_sq = 0.25;
  RoundRecord idle;
  idle.t = 3;
  const std::vector<RoundRecord> recs{one, two, idle};
  const auto d = estimate_diagnostics(recs, 0.01, 1.0, 2.0);
  CHECK(*d.tau_bar_per_round[1] == 2.0);
  CHECK_FALSE(d.tau_bar_per_round[2].has_value());
  CHECK(d.tau_hat_min == 2.0);
  CHECK(d.tau_hat_max == 3.0);
  CHECK(d.zeta_sq_hat == 0.5);
  CHECK(d.bound_value == convergence_bound(d.delta0, 0.01, 3, 2.0, 3.0, 1.0, 2.0, 0.5));
}

TEST_CASE("diagnostics of a real run respect their invariants") {
  auto c = small_config();
  c.T = 10;
  c.B_init = 0.02;
  const auto r = run(c);
  REQUIRE(r.diagnostics.has_value());
  const auto& d = *r.diagnostics;
  for (std::size_t t = 0; t < r.records.size(); ++t) {
    if (d.tau_bar_per_round[t]) {
      CHECK(d.tau_hat_min <= *d.tau_bar_per_round[t]);
      CHECK(*d.tau_bar_per_round[t] <= d.tau_hat_max);
    }
    if (r.records[t].error_sq) CHECK(d.zeta_sq_hat >= *r.records[t].error_sq);
  }
  CHECK(d.avg_grad_norm_sq.has_value());

  auto quiet = small_config();
  quiet.M = 1;
  quiet.I = 0;
  quiet.N0 = 0;
  quiet.denoise = DenoisePolicy::FadingBased;
  CHECK(run(quiet).diagnostics->zeta_sq_hat < 1e-12);
}

TEST_CASE("a separable task is learned without interference") {
  SimConfig c;
  c.T = 50;
  c.M = 10;
  c.P_in = 0;
  c.separation = 5.0;
  c.eval_every = 50;
  const auto ota = run(c);
  c.aggregation = AggregationMode::Ideal;
  const auto ideal = run(c);
  const double acc = *ota.records.back().test_accuracy;
  CHECK(acc > 0.9);
  CHECK(std::abs(acc - *ideal.records.back().test_accuracy) <= 0.05);
}
