#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "pgflow/projection.hpp"

namespace pgflow {

/// Three gradients in R⁴ spanning a 2-dimensional space: g3 = g1 + g2.
inline Matrix dependent_gradient_triple() {
  Matrix G(4, 3);
  G << 1, 2, 3,
       1, 1, 2,
       1, 1, 2,
       1, 1, 2;
  return G;
}

struct ProjectionSweep {
  /// (k, e_p) for the ridge projector with ε = 10^(−k).
  std::vector<std::pair<int, double>> ridge;
  /// (γ, e_p) for the recursive projector with smoothed delta.
  std::vector<std::pair<double, double>> recursive;
  double recursive_exact = 0.0;
};

/// Precision errors of the ridge and recursive projectors on G.
inline ProjectionSweep projection_sweep(const Matrix& G, int k_max = 15,
                                        const std::vector<double>& gammas = {10.0, 30.0, 100.0}) {
  ProjectionSweep out;
  for (int k = 1; k <= k_max; ++k) {
    out.ridge.emplace_back(k, project_ridge(G, std::pow(10.0, -k)).precision_error);
  }
  for (double g : gammas) {
    out.recursive.emplace_back(g, project_recursive(G, DeltaFn::smoothed(g)).precision_error);
  }
  out.recursive_exact = project_recursive(G, DeltaFn::exact()).precision_error;
  return out;
}

}  // namespace pgflow
