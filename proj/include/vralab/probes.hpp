#pragma once

// Curvature probes. Sharpness is estimated by power iteration on the
// preconditioned Hessian P^-1 H with P = diag(sqrt(m_t) + eps), the metric
// an Adam-family step sees; the identity preconditioner (m = 0, eps = 1)
// recovers the raw leading eigenvalue. Hessian-vector products come from a
// central difference of the gradient, so only first-order oracles are
// needed. aeos_threshold gives the largest preconditioned sharpness a step
// of size eta is expected to tolerate, (2 + 2 beta1) / ((1 - beta1) eta).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vralab/errors.hpp"
#include "vralab/rng.hpp"
#include "vralab/types.hpp"

namespace vralab::probes {

// Central-difference Hessian-vector product along `direction`. With h <= 0 a
// step of 1e-4 * (1 + |theta|) is used. Exact (up to rounding) for quadratics.
template <typename Scalar, typename GradFn>
Vector<Scalar> hvp(GradFn&& grad, const Vector<Scalar>& theta, const Vector<Scalar>& direction,
                   Scalar h = Scalar(-1)) {
  if (theta.size() != direction.size()) throw std::invalid_argument("hvp: size mismatch");
  const Scalar dir_norm = direction.norm();
  if (dir_norm == Scalar(0)) throw std::invalid_argument("hvp: zero direction");
  if (h <= Scalar(0)) h = Scalar(1e-4) * (Scalar(1) + theta.norm());
  const Vector<Scalar> unit = direction / dir_norm;
  Vector<Scalar> gp = grad(Vector<Scalar>(theta + h * unit));
  Vector<Scalar> gm = grad(Vector<Scalar>(theta - h * unit));
  if (gp.size() != theta.size() || gm.size() != theta.size())
    throw std::invalid_argument("hvp: gradient size mismatch");
  if (!gp.allFinite() || !gm.allFinite()) throw DivergenceError("hvp: non-finite gradient");
  return (gp - gm) * (dir_norm / (Scalar(2) * h));
}

template <typename Scalar = double>
struct SharpnessEstimate {
  Scalar lambda_max = Scalar(0);
  int iterations = 0;
  Scalar residual = Scalar(0);  // last relative change; above tol means not converged
};

template <typename Scalar = double>
struct PowerIterationOptions {
  int max_iters = 100;
  Scalar tol = Scalar(1e-4);
  std::uint64_t seed = 0;
};

// Power iteration on u -> P^-1 H u with Rayleigh-quotient estimates.
// `apply` must return H u. A warm-start vector, when given, is updated in
// place so successive probes resume from the previous eigenvector.
template <typename Scalar, typename ApplyFn>
SharpnessEstimate<Scalar> preconditioned_power_iteration(ApplyFn&& apply,
                                                         const Vector<Scalar>& precond_m, Scalar eps,
                                                         const PowerIterationOptions<Scalar>& opt,
                                                         Vector<Scalar>* warm_start = nullptr) {
  const Index n = precond_m.size();
  if (n <= 0) throw std::invalid_argument("power iteration: empty preconditioner");
  if (!(eps > Scalar(0))) throw std::invalid_argument("power iteration: eps must be positive");
  if ((precond_m.array() < Scalar(0)).any())
    throw std::invalid_argument("power iteration: preconditioner entries must be nonnegative");
  if (opt.max_iters <= 0) throw std::invalid_argument("power iteration: max_iters must be positive");
  if (!(opt.tol > Scalar(0))) throw std::invalid_argument("power iteration: tol must be positive");

  const Vector<Scalar> pdiag = (precond_m.array().sqrt() + eps).matrix();

  Vector<Scalar> u;
  if (warm_start != nullptr && warm_start->size() == n && warm_start->norm() > Scalar(0)) {
    u = *warm_start / warm_start->norm();
  } else {
    Rng rng(opt.seed);
    u = random_unit_vector<Scalar>(rng, n);
  }

  SharpnessEstimate<Scalar> est;
  Scalar lambda_prev = Scalar(0);
  for (int it = 1; it <= opt.max_iters; ++it) {
    Vector<Scalar> w = apply(u);
    if (w.size() != n) throw std::invalid_argument("power iteration: operator size mismatch");
    if (!w.allFinite()) throw DivergenceError("power iteration: non-finite operator output");
    w = (w.array() / pdiag.array()).matrix();

    const Scalar lambda = u.dot(w);
    est.lambda_max = lambda;
    est.iterations = it;

    const Scalar wn = w.norm();
    if (wn == Scalar(0)) {  // annihilated: spectrum is zero along this start
      est.lambda_max = Scalar(0);
      est.residual = Scalar(0);
      break;
    }
    u = w / wn;

    est.residual = std::abs(lambda - lambda_prev) /
                   std::max(std::abs(lambda), std::numeric_limits<Scalar>::min());
    if (it > 1 && est.residual <= opt.tol) break;
    lambda_prev = lambda;
  }
  if (warm_start != nullptr) *warm_start = u;
  return est;
}

// Largest stable preconditioned sharpness for step size eta.
template <typename Scalar>
Scalar aeos_threshold(Scalar beta1, Scalar eta) {
  if (!(beta1 >= Scalar(0) && beta1 < Scalar(1)))
    throw std::invalid_argument("aeos_threshold: beta1 must lie in [0,1)");
  if (!(eta > Scalar(0))) throw std::invalid_argument("aeos_threshold: eta must be positive");
  return ((Scalar(2) + Scalar(2) * beta1) / (Scalar(1) - beta1)) / eta;
}

// Warm-started probe helper for use inside a training loop.
struct SharpnessProbe {
  PowerIterationOptions<double> options;
  Vector<double> warm;

  template <typename GradFn>
  SharpnessEstimate<double> measure(GradFn&& grad, const Vector<double>& theta,
                                    const Vector<double>& precond_m, double eps,
                                    double hvp_step = -1.0) {
    auto apply = [&](const Vector<double>& u) { return hvp<double>(grad, theta, u, hvp_step); };
    return preconditioned_power_iteration<double>(apply, precond_m, eps, options, &warm);
  }
};

struct SharpnessSample {
  long step = 0;
  double lambda_max = 0.0;
  double effective_lr = 0.0;
  double threshold = 0.0;
  double residual = 0.0;
};

// Snapshot of the optimizer after one step, as needed by a probe.
struct ProbePoint {
  Vector<double> theta;
  Vector<double> precond_m;
  double eps = 1.0;
  double effective_lr = 0.0;
};

// Drives `advance` (one optimizer step per call) for `steps` steps and probes
// every `every_k` steps at the fresh iterate, so probes and steps alternate
// and the preconditioner is never stale.
template <typename AdvanceFn, typename GradFn>
std::vector<SharpnessSample> sharpness_trace(AdvanceFn&& advance, GradFn&& grad, long steps,
                                             int every_k, double beta1,
                                             const PowerIterationOptions<double>& opt = {}) {
  if (every_k <= 0) throw std::invalid_argument("sharpness_trace: every_k must be positive");
  if (steps < 0) throw std::invalid_argument("sharpness_trace: steps must be nonnegative");
  SharpnessProbe probe{opt, {}};
  std::vector<SharpnessSample> out;
  for (long s = 1; s <= steps; ++s) {
    const ProbePoint pt = advance();
    if (s % every_k != 0) continue;
    auto bound_grad = [&](const Vector<double>& th) { return grad(th); };
    const auto est = probe.measure(bound_grad, pt.theta, pt.precond_m, pt.eps);
    out.push_back({s, est.lambda_max, pt.effective_lr,
                   aeos_threshold(beta1, pt.effective_lr), est.residual});
  }
  return out;
}

}  // namespace vralab::probes
