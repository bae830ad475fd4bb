#pragma once

#include <span>

#include <Eigen/Dense>

#include "polysparse/matrix_core.hpp"

// Dense brute-force ground truth. Everything here is O(n^3) and bounded by
// dense_limit(); it exists to certify the sparse pipeline at desk scale.
namespace polysparse::oracle {

/// Relative cutoff below which an eigenvalue is treated as kernel.
inline constexpr double kKernelTolerance = 1e-10;
/// Slack allowed on the [1 - eps, 1 + eps] window before declaring failure.
inline constexpr double kBoundSlack = 1e-9;

struct PencilBounds {
  double lambda_min = 1.0;
  double lambda_max = 1.0;
};

struct ApproxResult {
  bool holds = false;
  PencilBounds bounds;
  /// Dimension of the shared kernel.
  Eigen::Index kernel_dim = 0;
};

/// (sum gamma) D - D * sum_i gamma_i (D^-1 M)^i, evaluated densely by Horner.
Eigen::MatrixXd dense_poly(const TMatrix& b, std::span<const double> gamma);

/// D (D^-1 M)^k as a dense matrix.
Eigen::MatrixXd dense_walk_power(const TMatrix& b, unsigned k);

/// Checks (1-eps) Y <= X <= (1+eps) Y on the complement of the shared kernel.
/// Throws KernelMismatch when the kernels differ and NotPSD when either input
/// has a significantly negative eigenvalue.
ApproxResult approx_check(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double eps);

/// Extreme generalized eigenvalues of the pencil (X, Y).
PencilBounds pencil_bounds(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Smallest eigenvalue relative to the spectral norm; >= -tol means PSD.
bool is_psd(const Eigen::MatrixXd& x, double tol = 1e-9);

struct SchurOutcome {
  bool premise = false;
  bool conclusion = false;

  /// The implication holds (vacuously when the premise fails).
  bool holds() const { return !premise || conclusion; }
};

/// If [[D1, -M], [-M, D2]] ~eps [[D1, -Q], [-Q, D2]] then
/// D2 - M D1^-1 M ~eps D2 - Q D1^-1 Q. Evaluates both sides densely.
SchurOutcome schur_complement_check(const PosDiag& d1, const PosDiag& d2, const Eigen::MatrixXd& m,
                                    const Eigen::MatrixXd& q, double eps);

/// Spectral radius of D^-1/2 M D^-1/2.
double normalized_spectral_radius(const PosDiag& d, const SparseSym& m);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& x);

}  // namespace polysparse::oracle
