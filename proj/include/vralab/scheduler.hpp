#pragma once

// Epoch-level learning-rate schedule: linear warmup from
// warmup_factor * base_lr up to base_lr, then cosine annealing down to
// eta_min at the final epoch. Composes multiplicatively with the
// velocity-damped rate: the scheduled value replaces the base rate before
// any damping or clipping is applied.

#include <cmath>
#include <numbers>

#include "vralab/errors.hpp"

namespace vralab::optim {

enum class SchedulerKind { Constant, WarmupCosine };

template <typename Scalar = double>
struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::Constant;
  int warmup_epochs = 5;
  Scalar warmup_factor = Scalar(0.1);
  Scalar eta_min = Scalar(1e-5);
  int total_epochs = 100;
};

template <typename Scalar>
void validate(const SchedulerConfig<Scalar>& sch) {
  if (sch.kind == SchedulerKind::Constant) return;
  if (sch.total_epochs < 1) throw ConfigError("scheduler: total_epochs must be positive");
  if (sch.warmup_epochs < 0 || sch.warmup_epochs >= sch.total_epochs)
    throw ConfigError("scheduler: warmup_epochs must lie in [0, total_epochs)");
  if (!(sch.warmup_factor > Scalar(0) && sch.warmup_factor <= Scalar(1)))
    throw ConfigError("scheduler: warmup_factor must lie in (0,1]");
  if (!(sch.eta_min >= Scalar(0))) throw ConfigError("scheduler: eta_min must be nonnegative");
}

template <typename Scalar>
Scalar warmup_cosine_lr(int epoch, Scalar base_lr, const SchedulerConfig<Scalar>& sch) {
  validate(sch);
  if (!(base_lr > Scalar(0))) throw ConfigError("scheduler: base_lr must be positive");
  if (epoch < 0 || epoch >= sch.total_epochs)
    throw ConfigError("scheduler: epoch out of range [0, total_epochs)");
  if (sch.kind == SchedulerKind::Constant) return base_lr;
  if (!(sch.eta_min < base_lr)) throw ConfigError("scheduler: eta_min must be below base_lr");

  if (epoch < sch.warmup_epochs) {
    const Scalar frac = Scalar(epoch) / Scalar(sch.warmup_epochs);
    return base_lr * (sch.warmup_factor + (Scalar(1) - sch.warmup_factor) * frac);
  }
  if (epoch == sch.warmup_epochs) return base_lr;  // ramp lands on base_lr exactly
  if (epoch == sch.total_epochs - 1) return sch.eta_min;

  const Scalar span = Scalar(sch.total_epochs - 1 - sch.warmup_epochs);
  const Scalar progress = Scalar(epoch - sch.warmup_epochs) / span;
  const Scalar cosine = (Scalar(1) + std::cos(Scalar(std::numbers::pi) * progress)) / Scalar(2);
  return sch.eta_min + (base_lr - sch.eta_min) * cosine;
}

// Scheduler dispatch used by the experiment driver. The constant schedule
// has no epoch horizon.
template <typename Scalar>
Scalar scheduled_lr(int epoch, Scalar base_lr, const SchedulerConfig<Scalar>& sch) {
  if (sch.kind == SchedulerKind::Constant) {
    if (!(base_lr > Scalar(0))) throw ConfigError("scheduler: base_lr must be positive");
    if (epoch < 0) throw ConfigError("scheduler: epoch must be nonnegative");
    return base_lr;
  }
  return warmup_cosine_lr(epoch, base_lr, sch);
}

}  // namespace vralab::optim
