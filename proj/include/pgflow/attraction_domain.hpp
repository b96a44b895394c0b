#pragma once

#include "pgflow/dynamics.hpp"
#include "pgflow/problem.hpp"

namespace pgflow::attraction {

/**
 * Largest ellipsoidal estimate of the attraction domain of
 * ẋ = −x + (σ(x) + 1)x with P = I:
 *
 *   min x1² + x2²  s.t.  σ(x) = (x1 + x2 + 2)((x2 + 1) − 0.1(x1 + 1)²) = 0.
 *
 * With d1 = x1 + 1, d2 = x2 + 1, d3 = x1 + x2 + 2 the constraint gradient is
 * [d2 − 0.1d1² − 0.2d1d3, d2 − 0.1d1² + d3]ᵀ, which vanishes at (−1, −1).
 */
inline Problem example1_problem() {
  Problem p;
  p.n = 2;
  p.m = 1;
  p.objective = [](const Vector& x) { return x.squaredNorm(); };
  p.objective_gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  p.constraints = [](const Vector& x) {
    const double d1 = x(0) + 1.0, d2 = x(1) + 1.0, d3 = x(0) + x(1) + 2.0;
    Vector c(1);
    c(0) = d3 * (d2 - 0.1 * d1 * d1);
    return c;
  };
  p.constraint_jacobian = [](const Vector& x) {
    const double d1 = x(0) + 1.0, d2 = x(1) + 1.0, d3 = x(0) + x(1) + 2.0;
    const double base = d2 - 0.1 * d1 * d1;
    Matrix J(2, 1);
    J(0, 0) = base - 0.2 * d1 * d3;
    J(1, 0) = base + d3;
    return J;
  };
  p.lagrangian_hessian = [](const Vector& x, const Vector& lambda) {
    const double d1 = x(0) + 1.0, d3 = x(0) + x(1) + 2.0;
    Matrix Hc(2, 2);
    Hc << -0.4 * d1 - 0.2 * d3, 1.0 - 0.2 * d1,
          1.0 - 0.2 * d1, 2.0;
    return Matrix(2.0 * Matrix::Identity(2, 2) - lambda(0) * Hc);
  };
  return p;
}

/// Reported minimizer and optimal value.
inline Vector reference_solution() { return Vector{{0.2062, -0.8546}}; }
inline constexpr double kReferenceValue = 0.7729;

/// Gain saturation threshold used by the built-in runs. Below it the
/// normalized flow turns into a plain gradient flow with gain k / floor.
inline constexpr double kDefaultGainFloor = 0.1;

/**
 * Built-in flow configuration: modified dynamics with ρ = Q = k/‖∇c c − f fᵀ∇v‖
 * (saturated at `floor`), recursive projector with smoothed delta e^(−γ|s|).
 */
inline FlowConfig example1_config(double gamma = 10.0, double k = 20.0,
                                  double floor = kDefaultGainFloor) {
  FlowConfig cfg;
  cfg.mode = ModifiedMode{1.0, true};
  cfg.projector = RecursiveMethod{DeltaFn::smoothed(gamma)};
  cfg.gain = AdaptiveGain{k, floor};
  return cfg;
}

}  // namespace pgflow::attraction
