#pragma once

#include <cstddef>
#include <optional>

namespace otafl {

enum class SchedulerVariant { Adaptive, NonAdaptiveWithStorage, NonAdaptiveNoStorage };

struct SchedulerKind {
  SchedulerVariant variant = SchedulerVariant::Adaptive;
  int fixed_tau = 2;               // non-adaptive variants
  std::optional<int> tau_cap = 5;  // adaptive; nullopt runs the unbounded allocation

  bool operator==(const SchedulerKind&) const = default;
};

/// Per-device participation decision for one round.
struct ScheduleDecision {
  bool active = false;
  int tau = 0;
  double fraction = 1.0;  // r; 1 means the full local dataset
  std::size_t subset_size = 0;  // samples trained on
  double planned_consumption = 0.0;
};

/// Energy-adaptive allocation: as many full epochs as the battery affords,
/// otherwise one epoch over a fraction of the data, otherwise idle. A
/// fractional subset that would round down to zero samples leaves the device idle.
ScheduleDecision decide_adaptive(double B, double E_up, double E_comp, std::size_t dataset_size,
                                 std::optional<int> tau_cap);

/// Fixed epoch count; active only if the battery covers the whole round.
ScheduleDecision decide_nonadaptive(double B, double E_up, double E_comp, int fixed_tau,
                                    std::size_t dataset_size);

ScheduleDecision decide(const SchedulerKind& kind, double B, double E_up, double E_comp,
                        std::size_t dataset_size);

/// Battery at the start of the next round, plus whatever energy was thrown
/// away (cap overflow, or the whole balance for the no-storage baseline).
struct BatteryTransition {
  double next = 0.0;
  double discarded = 0.0;
};

BatteryTransition apply_storage_policy(const SchedulerKind& kind, const ScheduleDecision& decision,
                                       double B, double harvested, double B_max);

}  // namespace otafl
