#pragma once

// Continuous-time limit of the velocity-regulated update. Position x and
// velocity v evolve under
//
//   dx/dt = v
//   dv/dt = -grad V(x) / (m + 3 beta3 |v|^2)
//
// with the conserved energy  E = m |v|^2 / 2 + (3/4) beta3 |v|^4 + V(x)
// and generalized momentum  p = (m + beta3 |v|^2) v.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vralab/errors.hpp"
#include "vralab/types.hpp"

namespace vralab::dynamics {

template <typename Scalar = double>
struct PhaseState {
  Vector<Scalar> x;
  Vector<Scalar> v;
};

template <typename Scalar = double>
struct KineticConfig {
  Scalar mass = Scalar(1);
  Scalar beta3 = Scalar(1);
};

template <typename Scalar>
void validate(const KineticConfig<Scalar>& k) {
  if (!(k.mass > Scalar(0))) throw ConfigError("kinetic config: mass must be positive");
  if (!(k.beta3 >= Scalar(0))) throw ConfigError("kinetic config: beta3 must be nonnegative");
}

namespace detail {
template <typename Scalar>
void check_state(const PhaseState<Scalar>& s) {
  if (s.x.size() == 0 || s.x.size() != s.v.size())
    throw std::invalid_argument("phase state: x and v must be nonempty and equal length");
}
}  // namespace detail

// Right-hand side (dx, dv) of the flow.
template <typename Scalar, typename GradFn>
PhaseState<Scalar> vector_field(const PhaseState<Scalar>& s, const KineticConfig<Scalar>& k,
                                GradFn&& grad_v) {
  detail::check_state(s);
  validate(k);
  const Scalar denom = k.mass + Scalar(3) * k.beta3 * s.v.squaredNorm();
  Vector<Scalar> g = grad_v(s.x);
  if (g.size() != s.x.size()) throw std::invalid_argument("vector_field: gradient size mismatch");
  if (!g.allFinite() || !std::isfinite(denom))
    throw DivergenceError("vector_field: non-finite value");
  return {s.v, Vector<Scalar>(-g / denom)};
}

template <typename Scalar>
Vector<Scalar> generalized_momentum(const PhaseState<Scalar>& s, const KineticConfig<Scalar>& k) {
  detail::check_state(s);
  validate(k);
  return (k.mass + k.beta3 * s.v.squaredNorm()) * s.v;
}

template <typename Scalar, typename PotentialFn>
Scalar energy(const PhaseState<Scalar>& s, const KineticConfig<Scalar>& k, PotentialFn&& potential) {
  detail::check_state(s);
  validate(k);
  const Scalar v2 = s.v.squaredNorm();
  return k.mass * v2 / Scalar(2) + Scalar(3) / Scalar(4) * k.beta3 * v2 * v2 + potential(s.x);
}

// Classic fourth-order Runge-Kutta step.
template <typename Scalar, typename GradFn>
PhaseState<Scalar> rk4_step(const PhaseState<Scalar>& s, Scalar dt, const KineticConfig<Scalar>& k,
                            GradFn&& grad_v) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("rk4_step: dt must be positive");
  auto shift = [&](const PhaseState<Scalar>& d, Scalar h) {
    return PhaseState<Scalar>{s.x + h * d.x, s.v + h * d.v};
  };
  const PhaseState<Scalar> k1 = vector_field(s, k, grad_v);
  const PhaseState<Scalar> k2 = vector_field(shift(k1, dt / Scalar(2)), k, grad_v);
  const PhaseState<Scalar> k3 = vector_field(shift(k2, dt / Scalar(2)), k, grad_v);
  const PhaseState<Scalar> k4 = vector_field(shift(k3, dt), k, grad_v);
  const Scalar w = dt / Scalar(6);
  return {s.x + w * (k1.x + Scalar(2) * (k2.x + k3.x) + k4.x),
          s.v + w * (k1.v + Scalar(2) * (k2.v + k3.v) + k4.v)};
}

// Semi-implicit Euler: velocity first, then position with the new velocity.
template <typename Scalar, typename GradFn>
PhaseState<Scalar> semi_implicit_euler_step(const PhaseState<Scalar>& s, Scalar dt,
                                            const KineticConfig<Scalar>& k, GradFn&& grad_v) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("semi_implicit_euler_step: dt must be positive");
  const PhaseState<Scalar> d = vector_field(s, k, grad_v);
  PhaseState<Scalar> next;
  next.v = s.v + dt * d.v;
  next.x = s.x + dt * next.v;
  return next;
}

enum class Integrator { RK4, SemiImplicitEuler };

template <typename Scalar, typename GradFn>
std::vector<PhaseState<Scalar>> integrate_trajectory(PhaseState<Scalar> s, Scalar dt, long steps,
                                                     const KineticConfig<Scalar>& k, GradFn&& grad_v,
                                                     Integrator method = Integrator::RK4) {
  if (steps < 0) throw std::invalid_argument("integrate_trajectory: steps must be nonnegative");
  std::vector<PhaseState<Scalar>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(s);
  for (long i = 0; i < steps; ++i) {
    s = method == Integrator::RK4 ? rk4_step(s, dt, k, grad_v)
                                  : semi_implicit_euler_step(s, dt, k, grad_v);
    if (!s.x.allFinite() || !s.v.allFinite())
      throw DivergenceError("integrate_trajectory: state left the finite range");
    out.push_back(s);
  }
  return out;
}

template <typename Scalar = double>
struct PortraitSample {
  Scalar x, v, dx, dv;
};

// One-dimensional phase portrait sampled on a regular grid.
template <typename Scalar, typename GradFn>
std::vector<PortraitSample<Scalar>> phase_portrait(Scalar x_min, Scalar x_max, Scalar v_min,
                                                   Scalar v_max, int nx, int nv,
                                                   const KineticConfig<Scalar>& k, GradFn&& grad_v) {
  validate(k);
  if (!(x_min < x_max) || !(v_min < v_max))
    throw std::invalid_argument("phase_portrait: degenerate range");
  if (nx < 2 || nv < 2) throw std::invalid_argument("phase_portrait: need at least a 2x2 grid");
  {
    Vector<Scalar> probe = Vector<Scalar>::Constant(1, x_min);
    if (grad_v(probe).size() != 1)
      throw std::invalid_argument("phase_portrait: potential must be one-dimensional");
  }
  std::vector<PortraitSample<Scalar>> out;
  out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nv));
  PhaseState<Scalar> s{Vector<Scalar>(1), Vector<Scalar>(1)};
  for (int i = 0; i < nx; ++i) {
    const Scalar x = x_min + (x_max - x_min) * Scalar(i) / Scalar(nx - 1);
    for (int j = 0; j < nv; ++j) {
      const Scalar v = v_min + (v_max - v_min) * Scalar(j) / Scalar(nv - 1);
      s.x[0] = x;
      s.v[0] = v;
      const PhaseState<Scalar> d = vector_field(s, k, grad_v);
      out.push_back({x, v, d.x[0], d.v[0]});
    }
  }
  return out;
}

}  // namespace vralab::dynamics
