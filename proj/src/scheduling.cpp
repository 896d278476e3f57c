#include "otafl/scheduling.hpp"

#include <algorithm>
#include <cmath>

#include "otafl/energy.hpp"
#include "otafl/error.hpp"

namespace otafl {

ScheduleDecision decide_adaptive(double B, double E_up, double E_comp, std::size_t dataset_size,
                                 std::optional<int> tau_cap) {
  if (!(E_comp > 0.0)) throw ContractViolation("decide_adaptive: E_comp must be positive");
  if (B < 0.0 || E_up < 0.0) throw ContractViolation("decide_adaptive: negative energy");

  ScheduleDecision d;
  if (B >= E_up + E_comp) {
    const double epochs = std::floor((B - E_up) / E_comp);
    int tau = epochs >= 1e9 ? 1'000'000'000 : static_cast<int>(epochs);
    if (tau_cap) tau = std::min(tau, *tau_cap);
    d.active = true;
    d.tau = tau;
    d.fraction = 1.0;
    d.subset_size = dataset_size;
    // Equal to at most B in exact arithmetic; the clamp absorbs rounding.
    d.planned_consumption = std::min(B, round_consumption(E_up, tau, E_comp));
    return d;
  }
  if (B > E_up) {
    const double r = (B - E_up) / E_comp;
    const auto subset = static_cast<std::size_t>(std::floor(r * static_cast<double>(dataset_size)));
    if (subset == 0) return d;
    d.active = true;
    d.tau = 1;
    d.fraction = r;
    d.subset_size = subset;
    d.planned_consumption = std::min(B, round_consumption(E_up, 1, E_comp, r));
  }
  return d;
}

ScheduleDecision decide_nonadaptive(double B, double E_up, double E_comp, int fixed_tau,
                                    std::size_t dataset_size) {
  if (fixed_tau < 1) throw ContractViolation("decide_nonadaptive: fixed_tau must be >= 1");
  ScheduleDecision d;
  const double required = round_consumption(E_up, fixed_tau, E_comp);
  if (is_eligible(B, required)) {
    d.active = true;
    d.tau = fixed_tau;
    d.fraction = 1.0;
    d.subset_size = dataset_size;
    d.planned_consumption = required;
  }
  return d;
}

ScheduleDecision decide(const SchedulerKind& kind, double B, double E_up, double E_comp,
                        std::size_t dataset_size) {
  if (kind.variant == SchedulerVariant::Adaptive) {
    return decide_adaptive(B, E_up, E_comp, dataset_size, kind.tau_cap);
  }
  return decide_nonadaptive(B, E_up, E_comp, kind.fixed_tau, dataset_size);
}

BatteryTransition apply_storage_policy(const SchedulerKind& kind, const ScheduleDecision& decision,
                                       double B, double harvested, double B_max) {
  const double consumed = decision.active ? decision.planned_consumption : 0.0;
  if (consumed > B) {
    throw ContractViolation("apply_storage_policy: planned consumption exceeds battery");
  }
  const double balance = B - consumed + harvested;
  BatteryTransition out;
  if (kind.variant == SchedulerVariant::NonAdaptiveNoStorage) {
    out.next = std::min(B_max, harvested);
  } else {
    out.next = update_battery({B}, consumed, harvested, B_max).level;
  }
  out.discarded = balance - out.next;
  return out;
}

}  // namespace otafl
