#pragma once

// First-order optimizers over flat parameter vectors. The velocity-regulated
// family rescales the base learning rate each step by
//
//   eta_t = alpha0 / (1 + min(beta3 * |v_t|^power, alpha1))
//
// so large recent-gradient velocity damps the step while the bound alpha1
// keeps the rate inside [alpha0 / (1 + alpha1), alpha0]. Baselines (AdamW,
// SGD with Nesterov momentum, RMSProp, plain momentum) share the same state
// layout so variants can be swapped without touching the driver loop.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vralab/errors.hpp"
#include "vralab/types.hpp"

namespace vralab::optim {

enum class Variant {
  VRAdam,
  AdamW,
  SGDNesterov,
  RMSProp,
  VRMomentum,
  Momentum,
};

template <typename Scalar = double>
struct OptimizerConfig {
  Variant variant = Variant::VRAdam;
  Scalar alpha0 = Scalar(1e-3);   // base learning rate
  Scalar alpha1 = Scalar(19);     // learning-rate cutoff: eta never drops below alpha0/(1+alpha1)
  Scalar beta1 = Scalar(0.9);     // velocity decay
  Scalar beta2 = Scalar(0.999);   // second-moment decay
  Scalar beta3 = Scalar(1);       // velocity-regulation strength
  int power = 2;                  // exponent on the velocity norm
  bool normgrad = false;          // damp on |g_t| instead of |v_t|
  Scalar epsilon = Scalar(1e-8);
  Scalar weight_decay = Scalar(0);
  Scalar sgd_momentum = Scalar(0.9);
  bool sgd_nesterov = true;
  Scalar rmsprop_alpha = Scalar(0.99);
  Scalar rmsprop_momentum = Scalar(0);
};

template <typename Scalar>
void validate(const OptimizerConfig<Scalar>& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError("optimizer config: " + msg); };
  if (!(cfg.alpha0 > Scalar(0))) fail("alpha0 must be positive");
  if (!(cfg.alpha1 > Scalar(0))) fail("alpha1 must be positive");
  if (!(cfg.beta1 >= Scalar(0) && cfg.beta1 < Scalar(1))) fail("beta1 must lie in [0,1)");
  if (!(cfg.beta2 >= Scalar(0) && cfg.beta2 < Scalar(1))) fail("beta2 must lie in [0,1)");
  if (!(cfg.beta3 >= Scalar(0))) fail("beta3 must be nonnegative");
  if (cfg.power < 1) fail("power must be a positive integer");
  if (!(cfg.epsilon > Scalar(0))) fail("epsilon must be positive");
  if (!(cfg.weight_decay >= Scalar(0))) fail("weight_decay must be nonnegative");
  if (!(cfg.sgd_momentum >= Scalar(0) && cfg.sgd_momentum < Scalar(1))) fail("sgd_momentum must lie in [0,1)");
  if (!(cfg.rmsprop_alpha >= Scalar(0) && cfg.rmsprop_alpha < Scalar(1))) fail("rmsprop_alpha must lie in [0,1)");
  if (!(cfg.rmsprop_momentum >= Scalar(0) && cfg.rmsprop_momentum < Scalar(1)))
    fail("rmsprop_momentum must lie in [0,1)");
}

// t counts completed steps; v is the velocity (first moment or momentum
// buffer depending on variant), m the elementwise second moment.
template <typename Scalar = double>
struct OptimizerState {
  long t = 0;
  Vector<Scalar> v;
  Vector<Scalar> m;
};

template <typename Scalar = double>
OptimizerState<Scalar> make_state(Index dim) {
  if (dim <= 0) throw std::invalid_argument("make_state requires dim > 0");
  OptimizerState<Scalar> s;
  s.v = Vector<Scalar>::Zero(dim);
  s.m = Vector<Scalar>::Zero(dim);
  return s;
}

template <typename Scalar = double>
struct StepOutcome {
  Vector<Scalar> new_params;
  Scalar effective_lr = Scalar(0);
  Scalar velocity_sq_norm = Scalar(0);
  Scalar grad_sq_norm = Scalar(0);
};

// |u|^power, with the power == 2 case kept as a plain squared norm.
template <typename Scalar, typename Derived>
Scalar norm_power(const Eigen::MatrixBase<Derived>& u, int power) {
  const Scalar sq = u.squaredNorm();
  if (power == 2) return sq;
  return std::pow(std::sqrt(sq), Scalar(power));
}

// Velocity-damped learning rate. norm_term is |v_t|^power (or |g_t|^power).
template <typename Scalar>
Scalar dynamic_lr(Scalar norm_term, const OptimizerConfig<Scalar>& cfg, Scalar base_lr) {
  if (!std::isfinite(norm_term) || norm_term < Scalar(0))
    throw DivergenceError("dynamic_lr: velocity norm is not finite");
  const Scalar damped = std::min(cfg.beta3 * norm_term, cfg.alpha1);
  return base_lr / (Scalar(1) + damped);
}

template <typename Scalar>
Scalar dynamic_lr(Scalar norm_term, const OptimizerConfig<Scalar>& cfg) {
  return dynamic_lr(norm_term, cfg, cfg.alpha0);
}

namespace detail {

template <typename Scalar>
void check_step_inputs(const Eigen::Ref<const Vector<Scalar>>& params,
                       const Eigen::Ref<const Vector<Scalar>>& grad,
                       const OptimizerState<Scalar>& state) {
  if (params.size() != grad.size())
    throw std::invalid_argument("step: params and grad sizes differ");
  if (state.v.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("step: state not sized for these params");
  if (!grad.allFinite()) throw DivergenceError("step: gradient contains NaN or Inf");
}

// Shared Adam-family kernel. With Dynamic=false the rate stays at base_lr;
// both paths execute the same instructions otherwise, so VRAdam with
// beta3 == 0 reproduces AdamW bit for bit.
template <typename Scalar, bool Dynamic>
StepOutcome<Scalar> adam_core(const Eigen::Ref<const Vector<Scalar>>& params,
                              const Eigen::Ref<const Vector<Scalar>>& grad,
                              OptimizerState<Scalar>& state,
                              const OptimizerConfig<Scalar>& cfg, Scalar base_lr) {
  check_step_inputs<Scalar>(params, grad, state);
  state.t += 1;
  state.v = cfg.beta1 * state.v + (Scalar(1) - cfg.beta1) * grad;
  state.m = (cfg.beta2 * state.m.array() + (Scalar(1) - cfg.beta2) * grad.array().square()).matrix();

  Scalar eta;
  if constexpr (Dynamic) {
    const Scalar term = cfg.normgrad ? norm_power<Scalar>(grad, cfg.power)
                                     : norm_power<Scalar>(state.v, cfg.power);
    eta = dynamic_lr(term, cfg, base_lr);
    assert(eta >= base_lr / (Scalar(1) + cfg.alpha1) && eta <= base_lr);
  } else {
    eta = base_lr;
  }

  const Scalar bc1 = Scalar(1) - std::pow(cfg.beta1, Scalar(state.t));
  const Scalar bc2 = Scalar(1) - std::pow(cfg.beta2, Scalar(state.t));

  StepOutcome<Scalar> out;
  out.new_params = params * (Scalar(1) - eta * cfg.weight_decay) -
                   eta * ((state.v / bc1).array() /
                          ((state.m / bc2).array().sqrt() + cfg.epsilon))
                             .matrix();
  out.effective_lr = eta;
  out.velocity_sq_norm = state.v.squaredNorm();
  out.grad_sq_norm = grad.squaredNorm();
  return out;
}

// Momentum pair with decoupled decay; VRMomentum drops the second moment and
// the bias corrections, keeping only the damped velocity step.
template <typename Scalar, bool Dynamic>
StepOutcome<Scalar> momentum_core(const Eigen::Ref<const Vector<Scalar>>& params,
                                  const Eigen::Ref<const Vector<Scalar>>& grad,
                                  OptimizerState<Scalar>& state,
                                  const OptimizerConfig<Scalar>& cfg, Scalar base_lr) {
  check_step_inputs<Scalar>(params, grad, state);
  state.t += 1;
  state.v = cfg.beta1 * state.v + (Scalar(1) - cfg.beta1) * grad;

  Scalar eta;
  if constexpr (Dynamic) {
    const Scalar term = cfg.normgrad ? norm_power<Scalar>(grad, cfg.power)
                                     : norm_power<Scalar>(state.v, cfg.power);
    eta = dynamic_lr(term, cfg, base_lr);
    assert(eta >= base_lr / (Scalar(1) + cfg.alpha1) && eta <= base_lr);
  } else {
    eta = base_lr;
  }

  StepOutcome<Scalar> out;
  out.new_params = params * (Scalar(1) - eta * cfg.weight_decay) - eta * state.v;
  out.effective_lr = eta;
  out.velocity_sq_norm = state.v.squaredNorm();
  out.grad_sq_norm = grad.squaredNorm();
  return out;
}

}  // namespace detail

template <typename Scalar>
StepOutcome<Scalar> vradam_step(const Eigen::Ref<const Vector<Scalar>>& params,
                                const Eigen::Ref<const Vector<Scalar>>& grad,
                                OptimizerState<Scalar>& state,
                                const OptimizerConfig<Scalar>& cfg,
                                Scalar base_lr_scale = Scalar(1)) {
  return detail::adam_core<Scalar, true>(params, grad, state, cfg, base_lr_scale * cfg.alpha0);
}

template <typename Scalar>
StepOutcome<Scalar> adamw_step(const Eigen::Ref<const Vector<Scalar>>& params,
                               const Eigen::Ref<const Vector<Scalar>>& grad,
                               OptimizerState<Scalar>& state,
                               const OptimizerConfig<Scalar>& cfg,
                               Scalar base_lr_scale = Scalar(1)) {
  return detail::adam_core<Scalar, false>(params, grad, state, cfg, base_lr_scale * cfg.alpha0);
}

// Coupled L2 decay, dampening zero; with sgd_momentum == 0 this is plain
// gradient descent.
template <typename Scalar>
StepOutcome<Scalar> sgd_nesterov_step(const Eigen::Ref<const Vector<Scalar>>& params,
                                      const Eigen::Ref<const Vector<Scalar>>& grad,
                                      OptimizerState<Scalar>& state,
                                      const OptimizerConfig<Scalar>& cfg,
                                      Scalar base_lr_scale = Scalar(1)) {
  detail::check_step_inputs<Scalar>(params, grad, state);
  state.t += 1;
  const Scalar lr = base_lr_scale * cfg.alpha0;
  const Scalar mu = cfg.sgd_momentum;

  Vector<Scalar> g = grad;
  if (cfg.weight_decay != Scalar(0)) g += cfg.weight_decay * params;
  Vector<Scalar> direction;
  if (mu != Scalar(0)) {
    state.v = mu * state.v + g;
    direction = cfg.sgd_nesterov ? Vector<Scalar>(g + mu * state.v) : state.v;
  } else {
    state.v = g;
    direction = g;
  }

  StepOutcome<Scalar> out;
  out.new_params = params - lr * direction;
  out.effective_lr = lr;
  out.velocity_sq_norm = state.v.squaredNorm();
  out.grad_sq_norm = grad.squaredNorm();
  return out;
}

// Uncentered second moment without bias correction; optional heavy-ball
// smoothing of the preconditioned gradient. Coupled L2 decay.
template <typename Scalar>
StepOutcome<Scalar> rmsprop_step(const Eigen::Ref<const Vector<Scalar>>& params,
                                 const Eigen::Ref<const Vector<Scalar>>& grad,
                                 OptimizerState<Scalar>& state,
                                 const OptimizerConfig<Scalar>& cfg,
                                 Scalar base_lr_scale = Scalar(1)) {
  detail::check_step_inputs<Scalar>(params, grad, state);
  state.t += 1;
  const Scalar lr = base_lr_scale * cfg.alpha0;

  Vector<Scalar> g = grad;
  if (cfg.weight_decay != Scalar(0)) g += cfg.weight_decay * params;
  state.m =
      (cfg.rmsprop_alpha * state.m.array() + (Scalar(1) - cfg.rmsprop_alpha) * g.array().square()).matrix();
  const Vector<Scalar> scaled = (g.array() / (state.m.array().sqrt() + cfg.epsilon)).matrix();

  StepOutcome<Scalar> out;
  if (cfg.rmsprop_momentum != Scalar(0)) {
    state.v = cfg.rmsprop_momentum * state.v + scaled;
    out.new_params = params - lr * state.v;
  } else {
    state.v = scaled;
    out.new_params = params - lr * scaled;
  }
  out.effective_lr = lr;
  out.velocity_sq_norm = state.v.squaredNorm();
  out.grad_sq_norm = grad.squaredNorm();
  return out;
}

template <typename Scalar>
StepOutcome<Scalar> vrmomentum_step(const Eigen::Ref<const Vector<Scalar>>& params,
                                    const Eigen::Ref<const Vector<Scalar>>& grad,
                                    OptimizerState<Scalar>& state,
                                    const OptimizerConfig<Scalar>& cfg,
                                    Scalar base_lr_scale = Scalar(1)) {
  return detail::momentum_core<Scalar, true>(params, grad, state, cfg, base_lr_scale * cfg.alpha0);
}

template <typename Scalar>
StepOutcome<Scalar> momentum_step(const Eigen::Ref<const Vector<Scalar>>& params,
                                  const Eigen::Ref<const Vector<Scalar>>& grad,
                                  OptimizerState<Scalar>& state,
                                  const OptimizerConfig<Scalar>& cfg,
                                  Scalar base_lr_scale = Scalar(1)) {
  return detail::momentum_core<Scalar, false>(params, grad, state, cfg, base_lr_scale * cfg.alpha0);
}

template <typename Scalar>
StepOutcome<Scalar> step(const Eigen::Ref<const Vector<Scalar>>& params,
                         const Eigen::Ref<const Vector<Scalar>>& grad,
                         OptimizerState<Scalar>& state, const OptimizerConfig<Scalar>& cfg,
                         Scalar base_lr_scale = Scalar(1)) {
  switch (cfg.variant) {
    case Variant::VRAdam: return vradam_step(params, grad, state, cfg, base_lr_scale);
    case Variant::AdamW: return adamw_step(params, grad, state, cfg, base_lr_scale);
    case Variant::SGDNesterov: return sgd_nesterov_step(params, grad, state, cfg, base_lr_scale);
    case Variant::RMSProp: return rmsprop_step(params, grad, state, cfg, base_lr_scale);
    case Variant::VRMomentum: return vrmomentum_step(params, grad, state, cfg, base_lr_scale);
    case Variant::Momentum: return momentum_step(params, grad, state, cfg, base_lr_scale);
  }
  throw std::invalid_argument("step: unknown optimizer variant");
}

}  // namespace vralab::optim
