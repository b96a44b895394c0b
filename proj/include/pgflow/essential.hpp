#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pgflow/dynamics.hpp"
#include "pgflow/error.hpp"
#include "pgflow/linalg.hpp"
#include "pgflow/problem.hpp"

namespace pgflow::essential {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Homogeneous image points (third entry 1) of N matched scene points.
struct CorrespondenceSet {
  std::vector<Vec3> m1;
  std::vector<Vec3> m2;

  [[nodiscard]] std::size_t size() const { return m1.size(); }
};

/// Pose (T, R), packed as x = [T; vec(R)] ∈ R¹².
struct EssentialState {
  Vec3 T = Vec3::Zero();
  Mat3 R = Mat3::Identity();
};

inline Vector pack(const EssentialState& s) {
  Vector x(12);
  x.head<3>() = s.T;
  x.tail<9>() = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(s.R.data());
  return x;
}

inline EssentialState unpack(const Vector& x) {
  if (x.size() != 12) throw DimensionMismatch("essential: state must have 12 entries");
  EssentialState s;
  s.T = x.head<3>();
  s.R = Eigen::Map<const Mat3>(x.tail<9>().data());
  return s;
}

/**
 * Image points of scene points M_k seen from two cameras related by
 * M_k = R̄ M_k′ + T̄: m1 = M/M(3), m2 = M′/M′(3) with M′ = R̄ᵀ(M − T̄).
 *
 * @throws DegenerateDepth if a depth is below 1e-9 in magnitude
 */
inline CorrespondenceSet generate_correspondences(const std::vector<Vec3>& points, const Vec3& T,
                                                  const Mat3& R) {
  CorrespondenceSet cs;
  cs.m1.reserve(points.size());
  cs.m2.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3& M = points[k];
    const Vec3 Mp = R.transpose() * (M - T);
    if (std::abs(M.z()) < 1e-9 || std::abs(Mp.z()) < 1e-9) {
      throw DegenerateDepth("point " + std::to_string(k + 1) + " has zero depth in a camera");
    }
    cs.m1.push_back(M / M.z());
    cs.m2.push_back(Mp / Mp.z());
  }
  return cs;
}

/// N×9 matrix with rows m2ᵀ ⊗ m1ᵀ, so that A·vec(E) stacks m1ᵀ E m2.
inline Matrix build_A(const CorrespondenceSet& cs) {
  if (cs.m1.size() != cs.m2.size()) throw DimensionMismatch("build_A: unpaired points");
  Matrix A(static_cast<Index>(cs.size()), 9);
  for (std::size_t k = 0; k < cs.size(); ++k) {
    A.row(static_cast<Index>(k)) = kron(cs.m2[k].transpose(), cs.m1[k].transpose());
  }
  return A;
}

/// Spectral norm of RᵀR̄ − I.
inline double rotation_error(const Mat3& R, const Mat3& R_ref) {
  return spectral_norm(R.transpose() * R_ref - Mat3::Identity());
}

/// The pose sharing E up to sign: T ↦ −T, R ↦ (2TTᵀ/‖T‖² − I)R.
inline EssentialState twisted_pair(const EssentialState& s) {
  const Mat3 flip = 2.0 * s.T * s.T.transpose() / s.T.squaredNorm() - Mat3::Identity();
  return {-s.T, flip * s.R};
}

/**
 * Rotation error up to the ambiguity of Aφ = 0. Of the four candidates
 * (±T, R) and (±T, twisted R) only two rotations are distinct.
 */
inline double rotation_error_up_to_ambiguity(const EssentialState& s, const Mat3& R_ref) {
  return std::min(rotation_error(s.R, R_ref), rotation_error(twisted_pair(s).R, R_ref));
}

/**
 * Essential-matrix estimation on S² × SO(3):
 *
 *   min ½ φᵀAᵀAφ,  φ = vec([T]×R),  s.t. ‖T‖² = 1, RᵀR = I.
 *
 * The flow uses the closed-form manifold tangent map
 * f = blockdiag(I − TTᵀ/‖T‖², (Rᵀ⊗I₃)H) instead of a projector.
 */
class EssentialModel {
 public:
  explicit EssentialModel(Matrix A) : A_(std::move(A)), AtA_(A_.transpose() * A_) {
    if (A_.cols() != 9) throw DimensionMismatch("essential: A must have 9 columns");
  }

  [[nodiscard]] const Matrix& A() const { return A_; }

  [[nodiscard]] static Vector phi(const Vector& x) {
    const EssentialState s = unpack(x);
    return vec(skew(s.T) * s.R);
  }

  [[nodiscard]] double objective(const Vector& x) const {
    const Vector r = A_ * phi(x);
    return 0.5 * r.squaredNorm();
  }

  /// dφ/dx = [(Rᵀ⊗I₃)H | I₃⊗[T]×], 9×12.
  [[nodiscard]] static Matrix phi_jacobian(const Vector& x) {
    const EssentialState s = unpack(x);
    Matrix J(9, 12);
    J.leftCols(3) = kron(s.R.transpose(), Mat3::Identity()) * h_matrix();
    J.rightCols(9) = kron(Mat3::Identity(), skew(s.T));
    return J;
  }

  [[nodiscard]] Vector gradient(const Vector& x) const {
    return phi_jacobian(x).transpose() * (AtA_ * phi(x));
  }

  /// f(x), 12×6.
  [[nodiscard]] static Matrix tangent(const Vector& x) {
    const EssentialState s = unpack(x);
    Matrix f = Matrix::Zero(12, 6);
    f.topLeftCorner(3, 3) = Mat3::Identity() - s.T * s.T.transpose() / s.T.squaredNorm();
    f.bottomRightCorner(9, 3) = kron(s.R.transpose(), Mat3::Identity()) * h_matrix();
    return f;
  }

  /// Θ(x) = [P Hᵀ(R⊗I₃); Hᵀ(R⊗I₃)(I₃⊗[T]×)ᵀ], 6×9; equals fᵀ (dφ/dx)ᵀ.
  [[nodiscard]] static Matrix theta(const Vector& x) {
    const EssentialState s = unpack(x);
    const Mat3 P = Mat3::Identity() - s.T * s.T.transpose() / s.T.squaredNorm();
    const Matrix HtRI = h_matrix().transpose() * kron(s.R, Mat3::Identity());
    Matrix Th(6, 9);
    Th.topRows(3) = P * HtRI;
    Th.bottomRows(3) = HtRI * kron(Mat3::Identity(), skew(s.T)).transpose();
    return Th;
  }

  /// ΘAᵀAΘᵀ, the 6×6 matrix the conditioner pseudo-inverts.
  [[nodiscard]] Matrix reduced_curvature(const Vector& x) const {
    const Matrix Th = theta(x);
    return Th * AtA_ * Th.transpose();
  }

  /**
   * Manifold constraints c(x) ∈ R⁷: ‖T‖² − 1 followed by the upper triangle
   * (row-major) of RᵀR − I.
   */
  [[nodiscard]] static Vector constraints(const Vector& x) {
    const EssentialState s = unpack(x);
    const Mat3 G = s.R.transpose() * s.R - Mat3::Identity();
    Vector c(7);
    c(0) = s.T.squaredNorm() - 1.0;
    Index k = 1;
    for (Index i = 0; i < 3; ++i) {
      for (Index j = i; j < 3; ++j) c(k++) = G(i, j);
    }
    return c;
  }

  /// 12×7 with column i = ∇cᵢ.
  [[nodiscard]] static Matrix constraint_jacobian(const Vector& x) {
    const EssentialState s = unpack(x);
    Matrix J = Matrix::Zero(12, 7);
    J.block<3, 1>(0, 0) = 2.0 * s.T;
    // ∂(rᵢᵀrⱼ)/∂R(:, i) = rⱼ, ∂/∂R(:, j) = rᵢ (vec(R) stacks columns).
    Index k = 1;
    for (Index i = 0; i < 3; ++i) {
      for (Index j = i; j < 3; ++j) {
        J.block<3, 1>(3 + 3 * i, k) += s.R.col(j);
        J.block<3, 1>(3 + 3 * j, k) += s.R.col(i);
        ++k;
      }
    }
    return J;
  }

  /// Manifold drift max(|‖T‖² − 1|, ‖RᵀR − I‖).
  [[nodiscard]] static double manifold_drift(const Vector& x) {
    const EssentialState s = unpack(x);
    return std::max(std::abs(s.T.squaredNorm() - 1.0),
                    spectral_norm(s.R.transpose() * s.R - Mat3::Identity()));
  }

  [[nodiscard]] Problem problem() const {
    Problem p;
    p.n = 12;
    p.m = 7;
    auto self = std::make_shared<const EssentialModel>(*this);
    p.objective = [self](const Vector& x) { return self->objective(x); };
    p.objective_gradient = [self](const Vector& x) { return self->gradient(x); };
    p.constraints = &EssentialModel::constraints;
    p.constraint_jacobian = &EssentialModel::constraint_jacobian;
    return p;
  }

 private:
  Matrix A_;
  Matrix AtA_;
};

/**
 * ẋ = −μ f((ΘAᵀAΘᵀ)† + εI₆)ΘAᵀAφ. `refresh_every` is the number of
 * accepted steps between updates of the conditioner (1 = every step).
 */
inline FlowField essential_flow(const EssentialModel& model, double mu = 20.0, double eps = 0.01,
                                std::size_t refresh_every = 1) {
  FlowConfig cfg;
  cfg.mode = FeasibleMode{};
  cfg.gain = PinvConditionerGain{mu, eps, refresh_every};
  FlowField field(model.problem(), cfg);
  auto self = std::make_shared<const EssentialModel>(model);
  field.with_tangent_map([](const Vector& x) { return EssentialModel::tangent(x); })
      .with_curvature([self](const Vector& x, const Matrix&) { return self->reduced_curvature(x); });
  return field;
}

/// Built-in data: six scene points, the true pose and the initial state.
struct Example2Data {
  std::vector<Vec3> points;
  Vec3 T_true;
  Mat3 R_printed;
  /// R_printed projected onto SO(3).
  Mat3 R_true;
  EssentialState start;
};

inline Example2Data example2_data() {
  Example2Data d;
  d.points = {Vec3(-1, 1, 1), Vec3(2, 0, 1),  Vec3(1, -1, 1),
              Vec3(-1, -1, 1), Vec3(1, 1, 1), Vec3(-1, 3, 1)};
  d.T_true = Vec3(1, 1, -1);
  d.R_printed << 0.9900, -0.0894, 0.1088,
                 0.0993, 0.9910, -0.0894,
                 -0.0998, 0.0993, 0.9900;
  d.R_true = nearest_rotation(d.R_printed);
  d.start = {Vec3(0, 0, 1), Mat3::Identity()};
  return d;
}

}  // namespace pgflow::essential
