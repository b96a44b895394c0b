#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>

#include "pgflow/linalg.hpp"
#include "pgflow/problem.hpp"
#include "pgflow/projection.hpp"

namespace pgflow {

// Gain strategies for Q(x) in u = −Q fᵀ∇v.

struct IdentityGain {};

struct ScalarGain {
  double q = 1.0;
};

/// q(x) = k / max(‖∇c·c − f·fᵀ·∇v‖, floor), refreshed at every evaluation.
struct AdaptiveGain {
  double k = 20.0;
  double floor = 1e-9;
};

/// Q = μ((fᵀ W f)₊† + εI) with W a curvature matrix of v and (·)₊ the positive
/// semidefinite part; cached between
/// refreshes every `refresh_every` accepted steps (0 = every evaluation).
struct PinvConditionerGain {
  double mu = 20.0;
  double eps = 0.01;
  std::size_t refresh_every = 10;
};

using GainStrategy = std::variant<IdentityGain, ScalarGain, AdaptiveGain, PinvConditionerGain>;

struct FeasibleMode {};

/// Adds −ρ∇c·c. With rho_follows_gain the scalar gain q(x) is used for ρ.
struct ModifiedMode {
  double rho = 1.0;
  bool rho_follows_gain = false;
};

using FlowMode = std::variant<FeasibleMode, ModifiedMode>;

struct FlowConfig {
  FlowMode mode = FeasibleMode{};
  ProjectorMethod projector = RecursiveMethod{};
  GainStrategy gain = IdentityGain{};

  void validate() const {
    if (const auto* m = std::get_if<ModifiedMode>(&mode)) {
      if (!m->rho_follows_gain && !(m->rho > 0.0)) {
        throw std::invalid_argument("modified mode requires rho > 0");
      }
    }
    std::visit(
        [](const auto& g) {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, ScalarGain>) {
            if (!(g.q > 0.0)) throw std::invalid_argument("scalar gain must be positive");
          } else if constexpr (std::is_same_v<G, AdaptiveGain>) {
            if (!(g.k > 0.0) || !(g.floor > 0.0)) {
              throw std::invalid_argument("adaptive gain requires k > 0 and floor > 0");
            }
          } else if constexpr (std::is_same_v<G, PinvConditionerGain>) {
            if (g.mu < 0.0 || !(g.eps > 0.0)) {
              throw std::invalid_argument("pinv conditioner requires mu >= 0 and eps > 0");
            }
          }
        },
        gain);
  }
};

/// What a gain strategy may look at.
struct GainContext {
  const Matrix& f;
  const Vector& grad_v;
  const Matrix& jac_c;
  const Vector& c;
  /// l×l reduced curvature fᵀWf; required by the pinv conditioner only.
  const Matrix* curvature = nullptr;
};

/// Scalar value of a scalar-type gain (identity, scalar, adaptive).
inline double scalar_gain(const GainStrategy& strategy, const GainContext& ctx) {
  if (std::holds_alternative<IdentityGain>(strategy)) return 1.0;
  if (const auto* s = std::get_if<ScalarGain>(&strategy)) return s->q;
  if (const auto* a = std::get_if<AdaptiveGain>(&strategy)) {
    Vector w = ctx.f * (ctx.f.transpose() * ctx.grad_v);
    if (ctx.c.size() > 0) w = ctx.jac_c * ctx.c - w;
    return a->k / std::max(w.norm(), a->floor);
  }
  throw std::invalid_argument("gain strategy is not scalar");
}

/// Q for the given strategy; symmetric positive definite for positive parameters.
inline Matrix gain_matrix(const GainStrategy& strategy, const GainContext& ctx) {
  const Index l = ctx.f.cols();
  if (const auto* p = std::get_if<PinvConditionerGain>(&strategy)) {
    if (ctx.curvature == nullptr) {
      throw std::invalid_argument("pinv conditioner needs a curvature matrix");
    }
    // Only the positive semidefinite part is inverted, so that Q ≥ μεI even
    // when the supplied curvature is indefinite.
    const Matrix sym = 0.5 * (*ctx.curvature + ctx.curvature->transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector lam = eig.eigenvalues().cwiseMax(0.0);
    const Matrix psd = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    const Matrix inv = pinv(psd);
    return p->mu * (0.5 * (inv + inv.transpose()) + p->eps * Matrix::Identity(l, l));
  }
  return scalar_gain(strategy, ctx) * Matrix::Identity(l, l);
}

/// Everything computed during one field evaluation.
struct FieldEval {
  Vector xdot;
  Matrix f;
  Matrix Q;
  Vector grad_v;
  Vector c;
  Matrix jac_c;
  double rho = 0.0;
  /// v̇ along the projected part of the flow: −∇vᵀ f Q fᵀ ∇v.
  double dvdt = 0.0;
  double stationarity_gap = 0.0;
};

namespace detail {

inline Matrix fd_hessian(const std::function<Vector(const Vector&)>& grad, const Vector& x,
                         double h) {
  const Index n = x.size();
  Matrix H(n, n);
  for (Index j = 0; j < n; ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    H.col(j) = (grad(xp) - grad(xm)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace detail

/**
 * Closed-loop vector field
 *
 *   ẋ = −f Q fᵀ ∇v                 (feasible mode)
 *   ẋ = −ρ ∇c c − f Q fᵀ ∇v        (modified mode)
 *
 * The projector f is rebuilt from ∇c(x) at every evaluation, unless a custom
 * tangent map is installed. Only Q may be cached, and only for the pinv
 * conditioner; that cache belongs to a single trajectory.
 */
class FlowField {
 public:
  /// x ↦ f(x), n×l, columns spanning directions that keep c constant.
  using TangentMap = std::function<Matrix(const Vector&)>;
  /// (x, f) ↦ fᵀ W f, the l×l matrix the pinv conditioner inverts.
  using ReducedCurvature = std::function<Matrix(const Vector&, const Matrix&)>;

  FlowField(Problem problem, FlowConfig config)
      : problem_(std::move(problem)), config_(std::move(config)) {
    config_.validate();
    if (const auto* m = std::get_if<ModifiedMode>(&config_.mode);
        m != nullptr && m->rho_follows_gain &&
        std::holds_alternative<PinvConditionerGain>(config_.gain)) {
      throw std::invalid_argument("rho can only follow a scalar gain");
    }
  }

  FlowField& with_tangent_map(TangentMap map) {
    tangent_map_ = std::move(map);
    return *this;
  }

  FlowField& with_curvature(ReducedCurvature curvature) {
    curvature_ = std::move(curvature);
    return *this;
  }

  [[nodiscard]] const Problem& problem() const { return problem_; }
  [[nodiscard]] const FlowConfig& config() const { return config_; }

  [[nodiscard]] Matrix tangent(const Vector& x, const Matrix& jac_c) const {
    if (tangent_map_) return tangent_map_(x);
    return build_projector(jac_c, config_.projector).matrix;
  }

  [[nodiscard]] FieldEval evaluate(const Vector& x) const {
    if (x.size() != problem_.n) throw DimensionMismatch("flow field: wrong state dimension");
    FieldEval e;
    e.grad_v = problem_.objective_gradient(x);
    e.c = problem_.c(x);
    e.jac_c = problem_.jac(x);
    e.f = tangent(x, e.jac_c);

    const Vector ftg = e.f.transpose() * e.grad_v;
    e.stationarity_gap = ftg.norm();

    if (const auto* p = std::get_if<PinvConditionerGain>(&config_.gain)) {
      if (cached_q_) {
        e.Q = *cached_q_;
      } else {
        const Matrix W = reduced_curvature(x, e.f);
        e.Q = gain_matrix(*p, {e.f, e.grad_v, e.jac_c, e.c, &W});
      }
    } else {
      e.Q = gain_matrix(config_.gain, {e.f, e.grad_v, e.jac_c, e.c, nullptr});
    }

    const Vector u = e.Q * ftg;
    e.dvdt = -ftg.dot(u);
    e.xdot = -(e.f * u);

    if (const auto* m = std::get_if<ModifiedMode>(&config_.mode)) {
      e.rho = m->rho_follows_gain
                  ? scalar_gain(config_.gain, {e.f, e.grad_v, e.jac_c, e.c, nullptr})
                  : m->rho;
      if (e.c.size() > 0) e.xdot -= e.rho * (e.jac_c * e.c);
    }
    if (!e.xdot.allFinite()) throw NonFiniteEvaluation("flow field produced a non-finite rate");
    return e;
  }

  Vector operator()(const Vector& x) const { return evaluate(x).xdot; }

  /// Start a trajectory at x0: resets the accepted-step counter and Q cache.
  void reset(const Vector& x0) {
    accepted_ = 0;
    cached_q_.reset();
    refresh(x0);
  }

  /// Hook for the integrator after each accepted step.
  void on_accepted_step(const Vector& x) {
    ++accepted_;
    const auto* p = std::get_if<PinvConditionerGain>(&config_.gain);
    if (p == nullptr) return;
    if (p->refresh_every == 0 || accepted_ % p->refresh_every == 0) refresh(x);
  }

 private:
  [[nodiscard]] Matrix reduced_curvature(const Vector& x, const Matrix& f) const {
    if (curvature_) return curvature_(x, f);
    const Matrix H = detail::fd_hessian(problem_.objective_gradient, x, 1e-5);
    return f.transpose() * H * f;
  }

  void refresh(const Vector& x) {
    const auto* p = std::get_if<PinvConditionerGain>(&config_.gain);
    if (p == nullptr || p->refresh_every == 0) return;
    const Vector g = problem_.objective_gradient(x);
    const Vector c = problem_.c(x);
    const Matrix J = problem_.jac(x);
    const Matrix f = tangent(x, J);
    const Matrix W = reduced_curvature(x, f);
    cached_q_ = gain_matrix(*p, {f, g, J, c, &W});
  }

  Problem problem_;
  FlowConfig config_;
  TangentMap tangent_map_;
  ReducedCurvature curvature_;
  std::optional<Matrix> cached_q_;
  std::size_t accepted_ = 0;
};

/// Field of the constraint-preserving flow; cfg.mode must be feasible.
inline FlowField feasible_field(Problem p, FlowConfig cfg) {
  if (!std::holds_alternative<FeasibleMode>(cfg.mode)) {
    throw std::invalid_argument("feasible_field: config is not in feasible mode");
  }
  return FlowField(std::move(p), std::move(cfg));
}

/// Field of the constraint-restoring flow; cfg.mode must be modified.
inline FlowField modified_field(Problem p, FlowConfig cfg) {
  if (!std::holds_alternative<ModifiedMode>(cfg.mode)) {
    throw std::invalid_argument("modified_field: config is not in modified mode");
  }
  return FlowField(std::move(p), std::move(cfg));
}

}  // namespace pgflow
