#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "pgflow/error.hpp"

namespace pgflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative rank threshold used when the caller does not supply one:
/// 1e-12 · max(rows, cols). Multiplied by the largest singular value.
inline double default_rank_tol(Index rows, Index cols) {
  return 1e-12 * static_cast<double>(std::max<Index>({rows, cols, 1}));
}

/// Columns stacked first to last: result[j·n + i] = M(i, j).
inline Vector vec(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

/// Inverse of vec for a known row count.
inline Matrix unvec(const Vector& v, Index rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw DimensionMismatch("unvec: length is not a multiple of the row count");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

/// Kronecker product; block (i, j) of the result is X(i, j) · Y.
inline Matrix kron(const Matrix& X, const Matrix& Y) {
  Matrix K(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      K.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
    }
  }
  return K;
}

/// Cross-product matrix: skew(x) · y = x × y.
inline Eigen::Matrix3d skew(const Vector& x) {
  if (x.size() != 3) {
    throw DimensionMismatch("skew: expected a 3-vector");
  }
  Eigen::Matrix3d S;
  S << 0.0, -x(2), x(1),
       x(2), 0.0, -x(0),
       -x(1), x(0), 0.0;
  return S;
}

/// The constant 9×3 matrix with vec(skew(x)) = H · x.
inline Matrix h_matrix() {
  Matrix Ht(3, 9);
  Ht << 0, 0, 0, 0, 0, 1, 0, -1, 0,
        0, 0, -1, 0, 0, 0, 1, 0, 0,
        0, 1, 0, -1, 0, 0, 0, 0, 0;
  return Ht.transpose();
}

/// Largest singular value (induced 2-norm). Zero for empty matrices.
inline double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

/// Number of singular values above rank_tol · σ_max.
inline Index numerical_rank(const Matrix& M, double rank_tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s(0) <= 0.0) return 0;
  const double cutoff = rank_tol * s(0);
  return static_cast<Index>((s.array() > cutoff).count());
}

/**
 * Moore–Penrose pseudoinverse by SVD. Singular values at or below
 * rank_tol · σ_max are treated as zero, so the zero matrix maps to the zero
 * matrix (transposed shape).
 */
inline Matrix pinv(const Matrix& M, double rank_tol) {
  if (rank_tol <= 0.0) {
    throw std::invalid_argument("pinv: rank_tol must be positive");
  }
  Matrix out = Matrix::Zero(M.cols(), M.rows());
  if (M.size() == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(0) <= 0.0) return out;
  const double cutoff = rank_tol * s(0);
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      out.noalias() +=
          (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).transpose();
    }
  }
  return out;
}

inline Matrix pinv(const Matrix& M) {
  return pinv(M, default_rank_tol(M.rows(), M.cols()));
}

/**
 * Orthonormal basis of null(A) as the columns of an n×k matrix,
 * k = n − rank(A). Returns an n×0 matrix when A has full column rank.
 */
inline Matrix null_space_basis(const Matrix& A, double rank_tol) {
  if (rank_tol <= 0.0) {
    throw std::invalid_argument("null_space_basis: rank_tol must be positive");
  }
  const Index n = A.cols();
  if (A.rows() == 0) return Matrix::Identity(n, n);
  if (n == 0) return Matrix(0, 0);
  // Pad with zero rows so that V is always n×n regardless of the shape of A.
  Matrix padded = Matrix::Zero(std::max(A.rows(), n), n);
  padded.topRows(A.rows()) = A;
  Eigen::JacobiSVD<Matrix> svd(padded, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Index rank = 0;
  if (s(0) > 0.0) {
    rank = static_cast<Index>((s.array() > rank_tol * s(0)).count());
  }
  return svd.matrixV().rightCols(n - rank);
}

inline Matrix null_space_basis(const Matrix& A) {
  return null_space_basis(A, default_rank_tol(A.rows(), A.cols()));
}

/// Nearest rotation (polar factor with det = +1).
inline Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

inline bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace pgflow
