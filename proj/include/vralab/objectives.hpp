#pragma once

// Type-erased scalar objective over a flat parameter vector. Dataset-backed
// objectives interpret the batch as row indices into their training data;
// analytic objectives ignore it. An empty batch means the full set.

#include <functional>
#include <span>
#include <stdexcept>

#include "vralab/types.hpp"

namespace vralab::models {

using BatchIndices = std::span<const Index>;

struct Objective {
  Index dim = 0;
  std::function<double(const Eigen::Ref<const Vector<double>>&, BatchIndices)> value;
  std::function<Vector<double>(const Eigen::Ref<const Vector<double>>&, BatchIndices)> grad;
  // Dense Hessian, available for quadratics only; empty otherwise.
  std::function<Matrix<double>(const Eigen::Ref<const Vector<double>>&)> hessian;
};

// f(theta) = theta' A theta / 2 for symmetric positive definite A.
inline Objective quadratic_objective(const Matrix<double>& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("quadratic_objective: A must be square and nonempty");
  if (!a.isApprox(a.transpose(), 1e-12))
    throw std::invalid_argument("quadratic_objective: A must be symmetric");
  Objective obj;
  obj.dim = a.rows();
  obj.value = [a](const Eigen::Ref<const Vector<double>>& theta, BatchIndices) {
    if (theta.size() != a.rows()) throw std::invalid_argument("quadratic_objective: size mismatch");
    return 0.5 * theta.dot(a * theta);
  };
  obj.grad = [a](const Eigen::Ref<const Vector<double>>& theta, BatchIndices) -> Vector<double> {
    if (theta.size() != a.rows()) throw std::invalid_argument("quadratic_objective: size mismatch");
    return a * theta;
  };
  obj.hessian = [a](const Eigen::Ref<const Vector<double>>&) { return a; };
  return obj;
}

// f(x, y) = (1 - x)^2 + 100 (y - x^2)^2.
inline Objective rosenbrock() {
  Objective obj;
  obj.dim = 2;
  obj.value = [](const Eigen::Ref<const Vector<double>>& theta, BatchIndices) {
    if (theta.size() != 2) throw std::invalid_argument("rosenbrock: expects two parameters");
    const double x = theta[0], y = theta[1];
    const double r = y - x * x;
    return (1.0 - x) * (1.0 - x) + 100.0 * r * r;
  };
  obj.grad = [](const Eigen::Ref<const Vector<double>>& theta, BatchIndices) -> Vector<double> {
    if (theta.size() != 2) throw std::invalid_argument("rosenbrock: expects two parameters");
    const double x = theta[0], y = theta[1];
    const double r = y - x * x;
    Vector<double> g(2);
    g[0] = -2.0 * (1.0 - x) - 400.0 * x * r;
    g[1] = 200.0 * r;
    return g;
  };
  return obj;
}

}  // namespace vralab::models
