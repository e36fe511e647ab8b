#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vralab/dynamics.hpp"

using namespace vralab;
using dynamics::Integrator;
using dynamics::KineticConfig;
using dynamics::PhaseState;

namespace {

auto harmonic_grad = [](const Vector<double>& x) -> Vector<double> { return x; };
auto harmonic_pot = [](const Vector<double>& x) { return 0.5 * x.squaredNorm(); };

PhaseState<double> unit_state() {
  PhaseState<double> s;
  s.x = Vector<double>::Constant(1, 1.0);
  s.v = Vector<double>::Constant(1, 1.0);
  return s;
}

}  // namespace

TEST_CASE("the quartic kinetic term slows the acceleration") {
  KineticConfig<double> k;  // mass 1, beta3 1
  const auto d = dynamics::vector_field(unit_state(), k, harmonic_grad);
  CHECK(d.x[0] == 1.0);
  CHECK(d.v[0] == -0.25);  // -1 / (1 + 3)
}

TEST_CASE("zero quartic coefficient recovers the newtonian field") {
  KineticConfig<double> k;
  k.beta3 = 0.0;
  k.mass = 2.0;
  const auto d = dynamics::vector_field(unit_state(), k, harmonic_grad);
  CHECK(d.v[0] == -0.5);
}

TEST_CASE("energy and momentum match the closed forms") {
  KineticConfig<double> k;
  const auto s = unit_state();
  CHECK(dynamics::energy(s, k, harmonic_pot) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(dynamics::generalized_momentum(s, k)[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("rk4 conserves the modified energy to high accuracy") {
  KineticConfig<double> k;
  PhaseState<double> s = unit_state();
  const double e0 = dynamics::energy(s, k, harmonic_pot);
  for (int i = 0; i < 10000; ++i) s = dynamics::rk4_step(s, 1e-3, k, harmonic_grad);
  const double e1 = dynamics::energy(s, k, harmonic_pot);
  CHECK(std::abs(e1 - e0) / e0 < 1e-6);
}

TEST_CASE("rk4 self-converges at fourth order") {
  KineticConfig<double> k;
  auto advance = [&](double dt, int n) {
    PhaseState<double> s = unit_state();
    for (int i = 0; i < n; ++i) s = dynamics::rk4_step(s, dt, k, harmonic_grad);
    return s.x[0];
  };
  const double fine = advance(0.0025, 400);  // near-exact reference
  const double err_h = std::abs(advance(0.1, 10) - fine);
  const double err_h2 = std::abs(advance(0.05, 20) - fine);
  const double ratio = err_h / err_h2;
  CHECK(ratio > 12.0);  // ~16 for a fourth-order scheme
  CHECK(ratio < 20.0);
}

TEST_CASE("semi-implicit euler drifts at first order in the step size") {
  // The quartic kinetic term couples x and v in the update, so the scheme is
  // not symplectic here and the energy error grows ~linearly in dt.
  KineticConfig<double> k;
  auto worst_err = [&](double dt, int n) {
    PhaseState<double> s = unit_state();
    const double e0 = dynamics::energy(s, k, harmonic_pot);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      s = dynamics::semi_implicit_euler_step(s, dt, k, harmonic_grad);
      worst = std::max(worst, std::abs(dynamics::energy(s, k, harmonic_pot) - e0) / e0);
    }
    return worst;
  };
  const double coarse = worst_err(2e-3, 10000);  // both horizons end at t = 20
  const double fine = worst_err(1e-3, 20000);
  CHECK(fine < 0.005);
  const double ratio = coarse / fine;
  CHECK(ratio > 1.6);  // ~2 for a first-order scheme
  CHECK(ratio < 2.4);
}

TEST_CASE("trajectories include the initial state") {
  KineticConfig<double> k;
  const auto traj =
      dynamics::integrate_trajectory(unit_state(), 0.01, 100, k, harmonic_grad, Integrator::RK4);
  CHECK(traj.size() == 101);
  CHECK(traj.front().x[0] == 1.0);
  const auto traj2 = dynamics::integrate_trajectory(unit_state(), 0.01, 0, k, harmonic_grad,
                                                    Integrator::SemiImplicitEuler);
  CHECK(traj2.size() == 1);
}

TEST_CASE("both integrators agree in the small-step limit") {
  KineticConfig<double> k;
  k.beta3 = 0.7;
  PhaseState<double> a = unit_state(), b = unit_state();
  for (int i = 0; i < 1000; ++i) {
    a = dynamics::rk4_step(a, 1e-4, k, harmonic_grad);
    b = dynamics::semi_implicit_euler_step(b, 1e-4, k, harmonic_grad);
  }
  CHECK(a.x[0] == doctest::Approx(b.x[0]).epsilon(1e-3));
  CHECK(a.v[0] == doctest::Approx(b.v[0]).epsilon(1e-3));
}

TEST_CASE("the phase portrait samples the grid row-major in x") {
  KineticConfig<double> k;
  auto grid = dynamics::phase_portrait(-2.0, 2.0, -2.0, 2.0, 17, 17, k, harmonic_grad);
  CHECK(grid.size() == 17u * 17u);
  CHECK(grid.front().x == -2.0);
  CHECK(grid.front().v == -2.0);
  CHECK(grid.back().x == 2.0);
  CHECK(grid.back().v == 2.0);
  // the (x=1, v=1) node carries the slowed acceleration
  bool found = false;
  for (const auto& p : grid) {
    if (p.x == 1.0 && p.v == 1.0) {
      CHECK(p.dx == 1.0);
      CHECK(p.dv == -0.25);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("invalid dynamics inputs are rejected") {
  KineticConfig<double> k;
  CHECK_THROWS_AS(dynamics::rk4_step(unit_state(), 0.0, k, harmonic_grad), std::invalid_argument);
  CHECK_THROWS_AS(dynamics::phase_portrait(2.0, -2.0, -1.0, 1.0, 5, 5, k, harmonic_grad),
                  std::invalid_argument);
  CHECK_THROWS_AS(dynamics::phase_portrait(-1.0, 1.0, -1.0, 1.0, 1, 5, k, harmonic_grad),
                  std::invalid_argument);
  KineticConfig<double> bad;
  bad.mass = 0.0;
  CHECK_THROWS_AS(dynamics::vector_field(unit_state(), bad, harmonic_grad), ConfigError);
  bad = k;
  bad.beta3 = -1.0;
  CHECK_THROWS_AS(dynamics::vector_field(unit_state(), bad, harmonic_grad), ConfigError);
  PhaseState<double> mismatched;
  mismatched.x = Vector<double>::Ones(2);
  mismatched.v = Vector<double>::Ones(3);
  CHECK_THROWS_AS(dynamics::vector_field(mismatched, k, harmonic_grad), std::invalid_argument);
  auto nan_grad = [](const Vector<double>& x) -> Vector<double> {
    return Vector<double>::Constant(x.size(), std::nan(""));
  };
  CHECK_THROWS_AS(dynamics::vector_field(unit_state(), k, nan_grad), DivergenceError);
}
