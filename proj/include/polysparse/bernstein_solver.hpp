#pragma once

#include <span>

#include <Eigen/Dense>

#include "polysparse/matrix_core.hpp"

namespace polysparse {

inline constexpr double kNodeGap = 1e-8;
inline constexpr double kSolveTolerance = 1e-6;

/// Solves sum_j nodes[j]^i x_j = rhs[i], i = 0..n-1, with the Bjorck-Pereyra
/// dual recurrences in O(n^2). Throws IllConditioned if the relative residual
/// exceeds kSolveTolerance.
Vector solve_transpose_vandermonde(std::span<const double> nodes, std::span<const double> rhs);

/// Rows j, columns i: B_{N,i}(p_j).
Eigen::MatrixXd bernstein_matrix(std::span<const double> p);

struct Recovery {
  Vector alpha;
  /// All weights strictly inside (0, 1).
  bool valid = false;
  double residual = 0.0;
  /// Infinity-norm condition number of the Bernstein matrix.
  double condition = 0.0;
};

/// Weights alpha with gamma_i = sum_j alpha_j B_{N,i}(p_j), N = p.size() - 1.
Recovery recover_alpha(std::span<const double> p, std::span<const double> gamma);

}  // namespace polysparse
