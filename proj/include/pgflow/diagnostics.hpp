#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <optional>

#include "pgflow/dynamics.hpp"
#include "pgflow/linalg.hpp"
#include "pgflow/problem.hpp"
#include "pgflow/projection.hpp"

namespace pgflow {

struct OptimalityReport {
  double kkt_residual = 0.0;
  Vector multipliers;
  double constraint_violation = 0.0;
  bool regular = true;
  /// true: projected Hessian of the Lagrangian has min eigenvalue > 1e-8;
  /// false: < −1e-8; empty: indeterminate.
  std::optional<bool> second_order_pass;
  double min_projected_curvature = std::numeric_limits<double>::infinity();
  Index null_basis_dim = 0;
};

inline constexpr double kSecondOrderTol = 1e-8;

/// Numerical rank of ∇c(x) equals m. Singular values count when above
/// rank_tol · max(1, σ_max), so a vanishing Jacobian is always singular.
inline bool classify_regularity(const Problem& p, const Vector& x, double rank_tol = 1e-10) {
  if (p.m == 0) return true;
  const Matrix J = p.jac(x);
  Eigen::JacobiSVD<Matrix> svd(J);
  const auto& s = svd.singularValues();
  const double cutoff = rank_tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  return (s.array() > cutoff).count() == p.m;
}

/// ‖f(x)ᵀ∇v(x)‖.
inline double stationarity_gap(const Problem& p, const Vector& x, const Projector& f) {
  return (f.matrix.transpose() * p.objective_gradient(x)).norm();
}

/**
 * KKT analysis at x: least-squares multipliers λ = ∇c†∇v, residual
 * ‖∇v − ∇c λ‖, constraint violation ‖c‖ and the second-order test on an
 * orthonormal basis of null(∇cᵀ). Without an analytic Hessian the Lagrangian
 * Hessian comes from central differences of ∇v − ∇c λ with h = 1e-5.
 */
inline OptimalityReport kkt_report(const Problem& p, const Vector& x) {
  OptimalityReport r;
  const Vector g = p.objective_gradient(x);
  const Matrix J = p.jac(x);
  const Vector c = p.c(x);

  r.multipliers = p.m > 0 ? Vector(pinv(J) * g) : Vector::Zero(0);
  r.kkt_residual = (g - J * r.multipliers).norm();
  r.constraint_violation = c.norm();
  r.regular = classify_regularity(p, x);

  const Matrix Z = null_space_basis(J.transpose());
  r.null_basis_dim = Z.cols();
  if (Z.cols() == 0) {
    r.second_order_pass = true;
    return r;
  }

  Matrix H;
  if (p.lagrangian_hessian) {
    H = p.lagrangian_hessian(x, r.multipliers);
  } else {
    const Vector lambda = r.multipliers;
    H = detail::fd_hessian(
        [&](const Vector& y) -> Vector { return p.objective_gradient(y) - p.jac(y) * lambda; }, x,
        1e-5);
  }
  const Matrix reduced = Z.transpose() * (0.5 * (H + H.transpose())) * Z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced, Eigen::EigenvaluesOnly);
  r.min_projected_curvature = eig.eigenvalues()(0);
  if (r.min_projected_curvature > kSecondOrderTol) {
    r.second_order_pass = true;
  } else if (r.min_projected_curvature < -kSecondOrderTol) {
    r.second_order_pass = false;
  }
  return r;
}

}  // namespace pgflow
