#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "pgflow/linalg.hpp"

namespace pgflow {

/**
 * Equality-constrained minimization instance: minimize v(x) subject to
 * c(x) = 0.
 *
 * The constraint Jacobian is stored n×m with column i = ∇cᵢ(x); the usual
 * m×n Jacobian is its transpose. All callables must be pure.
 */
struct Problem {
  Index n = 0;
  Index m = 0;
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> objective_gradient;
  std::function<Vector(const Vector&)> constraints;
  std::function<Matrix(const Vector&)> constraint_jacobian;
  /// Optional ∇ₓₓL(x, λ) for L = v − λᵀc.
  std::function<Matrix(const Vector&, const Vector&)> lagrangian_hessian;

  [[nodiscard]] Vector c(const Vector& x) const {
    if (m == 0) return Vector::Zero(0);
    return constraints(x);
  }
  [[nodiscard]] Matrix jac(const Vector& x) const {
    if (m == 0) return Matrix::Zero(n, 0);
    return constraint_jacobian(x);
  }
};

struct GradientReport {
  enum class Source { objective, constraint };

  double max_abs_error_grad_v = 0.0;
  double max_abs_error_jac_c = 0.0;
  /// Location of the largest discrepancy: for the objective row is the
  /// coordinate and column is 0; for constraints row is the coordinate and
  /// column the constraint index.
  struct Location {
    Source source = Source::objective;
    Index row = 0;
    Index col = 0;
  } worst_index;

  [[nodiscard]] double max_error() const {
    return std::max(max_abs_error_grad_v, max_abs_error_jac_c);
  }
};

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteEvaluation(std::string(what) + " is not finite");
  return v;
}

inline const Vector& checked(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteEvaluation(std::string(what) + " is not finite");
  return v;
}

}  // namespace detail

/// Compare user derivatives against central differences with step h.
inline GradientReport check_gradients(const Problem& p, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradients: h must be positive");
  if (x.size() != p.n) throw DimensionMismatch("check_gradients: x has the wrong dimension");

  GradientReport report;
  const Vector g = p.objective_gradient(x);
  const Matrix J = p.jac(x);
  detail::checked(p.objective(x), "objective");
  detail::checked(p.c(x), "constraints");

  double worst = -1.0;
  for (Index i = 0; i < p.n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double dv = (detail::checked(p.objective(xp), "objective") -
                       detail::checked(p.objective(xm), "objective")) / (2.0 * h);
    const double ev = std::abs(dv - g(i));
    report.max_abs_error_grad_v = std::max(report.max_abs_error_grad_v, ev);
    if (ev > worst) {
      worst = ev;
      report.worst_index = {GradientReport::Source::objective, i, 0};
    }
    if (p.m == 0) continue;
    const Vector dc = (detail::checked(p.c(xp), "constraints") -
                       detail::checked(p.c(xm), "constraints")) / (2.0 * h);
    for (Index j = 0; j < p.m; ++j) {
      const double ec = std::abs(dc(j) - J(i, j));
      report.max_abs_error_jac_c = std::max(report.max_abs_error_jac_c, ec);
      if (ec > worst) {
        worst = ec;
        report.worst_index = {GradientReport::Source::constraint, i, j};
      }
    }
  }
  return report;
}

/// c(x) = A x − b with the constant Jacobian Aᵀ.
inline Problem linear_constrained(Matrix A, Vector b, std::function<double(const Vector&)> v,
                                  std::function<Vector(const Vector&)> grad_v) {
  if (A.rows() != b.size()) throw DimensionMismatch("linear_constrained: A and b disagree");
  Problem p;
  p.n = A.cols();
  p.m = A.rows();
  p.objective = std::move(v);
  p.objective_gradient = std::move(grad_v);
  p.constraints = [A, b](const Vector& x) -> Vector { return A * x - b; };
  p.constraint_jacobian = [At = Matrix(A.transpose())](const Vector&) -> Matrix { return At; };
  return p;
}

/// min x1 + x2 s.t. x1 − x2 = 0: unbounded below, so fᵀ∇v never vanishes.
inline Problem unbounded_linear_problem() {
  Matrix A(1, 2);
  A << 1.0, -1.0;
  return linear_constrained(
      A, Vector::Zero(1), [](const Vector& x) { return x.sum(); },
      [](const Vector& x) -> Vector { return Vector::Ones(x.size()); });
}

}  // namespace pgflow
