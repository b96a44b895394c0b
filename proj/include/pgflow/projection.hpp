#pragma once

#include <cmath>
#include <limits>
#include <variant>

#include "pgflow/linalg.hpp"

namespace pgflow {

/**
 * Impulse function used to keep the rank-one projector defined when the
 * direction vanishes.
 *
 * The exact kind is realized with an explicit threshold: it returns 1 when
 * s ≤ zero_tol (or 1e-14 · n when zero_tol is not set) and 0 otherwise. The
 * smoothed kind is e^(−γ|s|), which keeps the projector continuous in x.
 */
struct DeltaFn {
  enum class Kind { exact, smoothed };

  Kind kind = Kind::exact;
  double gamma = 30.0;
  double zero_tol = -1.0;

  static DeltaFn exact(double zero_tol = -1.0) { return {Kind::exact, 0.0, zero_tol}; }
  static DeltaFn smoothed(double gamma = 30.0) {
    if (!(gamma > 0.0)) throw std::invalid_argument("smoothed delta: gamma must be positive");
    return {Kind::smoothed, gamma, -1.0};
  }

  /// Evaluate at s for an ambient dimension n (only used by the exact threshold).
  [[nodiscard]] double operator()(double s, Index n) const {
    if (kind == Kind::smoothed) return std::exp(-gamma * std::abs(s));
    const double tol = zero_tol >= 0.0 ? zero_tol : 1e-14 * static_cast<double>(n);
    return s <= tol ? 1.0 : 0.0;
  }
};

struct NaiveMethod {
  double condition_cap = 1e12;
};

struct RidgeMethod {
  double eps = 1e-8;
};

struct RecursiveMethod {
  DeltaFn delta = DeltaFn::smoothed(30.0);
};

using ProjectorMethod = std::variant<NaiveMethod, RidgeMethod, RecursiveMethod>;

struct Projector {
  Matrix matrix;
  ProjectorMethod method;
  double precision_error = 0.0;
};

/// ‖Gᵀ f‖ in the induced 2-norm.
inline double precision_error(const Matrix& G, const Matrix& f) {
  if (G.rows() != f.rows()) {
    throw DimensionMismatch("precision_error: G and f row counts differ");
  }
  return spectral_norm(G.transpose() * f);
}

/**
 * Classical projector I − G(GᵀG)⁻¹Gᵀ. Throws SingularGram when
 * max(σ_max, 1)/σ_min of GᵀG exceeds the cap (default 1e12).
 */
inline Projector project_naive(const Matrix& G, const NaiveMethod& opts = {}) {
  const Index n = G.rows();
  Matrix f = Matrix::Identity(n, n);
  if (G.cols() > 0) {
    const Matrix gram = G.transpose() * G;
    Eigen::JacobiSVD<Matrix> svd(gram);
    const auto& s = svd.singularValues();
    // Conditioning is measured against max(σ_max, 1): for a single
    // constraint the relative condition number of the 1×1 Gram is always 1,
    // yet a vanishing gradient still has no inverse.
    const double scale = std::max(s(0), 1.0);
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0) || scale / smin > opts.condition_cap) {
      throw SingularGram(smin > 0.0 ? scale / smin : std::numeric_limits<double>::infinity());
    }
    f.noalias() -= G * gram.ldlt().solve(G.transpose());
  }
  Projector p{std::move(f), opts, 0.0};
  p.precision_error = precision_error(G, p.matrix);
  return p;
}

/**
 * Ridge-regularized projector I − G(εI + GᵀG)⁻¹Gᵀ; always defined.
 *
 * The inverse is formed explicitly, as the formula reads. For rank-deficient
 * G and small ε its rounding error grows like u/ε, which is what limits the
 * attainable precision error; a backward-stable solve would hide that.
 */
inline Projector project_ridge(const Matrix& G, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("project_ridge: eps must be positive");
  const Index n = G.rows();
  const Index m = G.cols();
  Matrix f = Matrix::Identity(n, n);
  if (m > 0) {
    const Matrix reg = eps * Matrix::Identity(m, m) + G.transpose() * G;
    const Matrix inv = reg.partialPivLu().inverse();
    f.noalias() -= G * inv * G.transpose();
  }
  Projector p{std::move(f), RidgeMethod{eps}, 0.0};
  p.precision_error = precision_error(G, p.matrix);
  return p;
}

/// Single-constraint projector I − g gᵀ / (δ(‖g‖²) + ‖g‖²); identity at g = 0.
inline Projector project_single(const Vector& g, const DeltaFn& delta) {
  const Index n = g.size();
  const double s = g.squaredNorm();
  Matrix f = Matrix::Identity(n, n);
  const double denom = delta(s, n) + s;
  if (denom > 0.0) f.noalias() -= (g / denom) * g.transpose();
  Projector p{std::move(f), RecursiveMethod{delta}, 0.0};
  p.precision_error = precision_error(g, p.matrix);
  return p;
}

/**
 * Recursive projector onto null(Gᵀ), one column at a time:
 *
 *   f₀ = I,  r = fₖ₋₁ᵀ gₖ,  fₖ = fₖ₋₁ (I − r rᵀ / (δ(‖r‖²) + ‖r‖²)).
 *
 * A column already in the span of the earlier ones gives r ≈ 0, the delta
 * term dominates the denominator and fₖ = fₖ₋₁. Total for every finite G.
 */
inline Projector project_recursive(const Matrix& G, const DeltaFn& delta) {
  const Index n = G.rows();
  Matrix f = Matrix::Identity(n, n);
  for (Index k = 0; k < G.cols(); ++k) {
    const Vector r = f.transpose() * G.col(k);
    const double s = r.squaredNorm();
    const double denom = delta(s, n) + s;
    if (!(denom > 0.0)) continue;
    const Vector fr = f * r;
    f.noalias() -= (fr / denom) * r.transpose();
  }
  Projector p{std::move(f), RecursiveMethod{delta}, 0.0};
  p.precision_error = precision_error(G, p.matrix);
  return p;
}

inline Projector build_projector(const Matrix& G, const ProjectorMethod& method) {
  return std::visit(
      [&](const auto& m) -> Projector {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NaiveMethod>) {
          return project_naive(G, m);
        } else if constexpr (std::is_same_v<M, RidgeMethod>) {
          return project_ridge(G, m.eps);
        } else {
          return project_recursive(G, m.delta);
        }
      },
      method);
}

}  // namespace pgflow
