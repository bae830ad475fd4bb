#include "polysparse/spectral_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace polysparse::oracle {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd walk_matrix(const TMatrix& b) {
  const VectorXd dinv = Eigen::Map<const VectorXd>(b.d().values().data(), static_cast<Index>(b.dim())).cwiseInverse();
  return dinv.asDiagonal() * b.m().to_dense();
}

MatrixXd symmetrized(const MatrixXd& x) { return 0.5 * (x + x.transpose()); }

double spectral_scale(const VectorXd& ev) {
  return ev.size() == 0 ? 0.0 : std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace

MatrixXd dense_poly(const TMatrix& b, std::span<const double> gamma) {
  check_dense_size(b.dim(), "dense_poly");
  require(!gamma.empty(), ErrorCode::InvalidParameter, "dense_poly: empty coefficient vector");
  for (double g : gamma) {
    require(std::isfinite(g) && g >= 0.0, ErrorCode::InvalidParameter,
            "dense_poly: coefficients must be nonnegative");
  }
  const auto n = static_cast<Index>(b.dim());
  const MatrixXd walk = walk_matrix(b);
  MatrixXd acc = gamma.back() * MatrixXd::Identity(n, n);
  for (std::size_t i = gamma.size() - 1; i-- > 0;) {
    acc = walk * acc;
    acc.diagonal().array() += gamma[i];
  }
  const double total = std::accumulate(gamma.begin(), gamma.end(), 0.0);
  const MatrixXd d = b.d().to_dense();
  return symmetrized(total * d - d * acc);
}

MatrixXd dense_walk_power(const TMatrix& b, unsigned k) {
  check_dense_size(b.dim(), "dense_walk_power");
  const auto n = static_cast<Index>(b.dim());
  const MatrixXd walk = walk_matrix(b);
  MatrixXd acc = MatrixXd::Identity(n, n);
  for (unsigned i = 0; i < k; ++i) acc = walk * acc;
  return symmetrized(b.d().to_dense() * acc);
}

bool is_psd(const MatrixXd& x, double tol) {
  if (x.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetrized(x), Eigen::EigenvaluesOnly);
  const VectorXd& ev = solver.eigenvalues();
  return ev(0) >= -tol * std::max(spectral_scale(ev), 1e-300);
}

ApproxResult approx_check(const MatrixXd& x, const MatrixXd& y, double eps) {
  require(x.rows() == x.cols() && y.rows() == y.cols() && x.rows() == y.rows(),
          ErrorCode::DimensionMismatch, "approx_check: shapes differ");
  require(std::isfinite(eps) && eps >= 0.0, ErrorCode::InvalidParameter,
          "approx_check: eps must be nonnegative");
  check_dense_size(static_cast<std::size_t>(x.rows()), "approx_check");

  const MatrixXd xs = symmetrized(x);
  const MatrixXd ys = symmetrized(y);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ysolve(ys);
  Eigen::SelfAdjointEigenSolver<MatrixXd> xsolve(xs, Eigen::EigenvaluesOnly);
  const VectorXd& yev = ysolve.eigenvalues();
  const VectorXd& xev = xsolve.eigenvalues();
  const double yscale = spectral_scale(yev);
  const double xscale = spectral_scale(xev);

  if (yev.size() > 0 && yev(0) < -1e-9 * yscale) fail(ErrorCode::NotPSD, "approx_check: Y is not PSD");
  if (xev.size() > 0 && xev(0) < -1e-9 * xscale) fail(ErrorCode::NotPSD, "approx_check: X is not PSD");

  const double ycut = kKernelTolerance * yscale;
  Index kernel = 0;
  while (kernel < yev.size() && yev(kernel) <= ycut) ++kernel;

  ApproxResult result;
  result.kernel_dim = kernel;
  const Index rank = yev.size() - kernel;
  if (rank == 0) {
    if (xscale > 0.0) fail(ErrorCode::KernelMismatch, "approx_check: Y vanishes but X does not");
    result.holds = true;
    return result;
  }

  // null(Y) must be annihilated by X.
  if (kernel > 0) {
    const MatrixXd ker = ysolve.eigenvectors().leftCols(kernel);
    const double leak = (xs * ker).norm();
    if (leak > 1e-7 * std::max(xscale, 1e-300) * std::sqrt(static_cast<double>(kernel))) {
      fail(ErrorCode::KernelMismatch,
           "approx_check: X does not vanish on the kernel of Y (leak " + std::to_string(leak) + ")");
    }
  }

  const MatrixXd basis = ysolve.eigenvectors().rightCols(rank);
  const VectorXd inv_sqrt = yev.tail(rank).cwiseSqrt().cwiseInverse();
  const MatrixXd projected = inv_sqrt.asDiagonal() * (basis.transpose() * xs * basis) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> pencil(symmetrized(projected), Eigen::EigenvaluesOnly);
  result.bounds.lambda_min = pencil.eigenvalues()(0);
  result.bounds.lambda_max = pencil.eigenvalues()(rank - 1);

  // X vanishing on a direction where Y does not means the kernels differ.
  if (result.bounds.lambda_min <= kKernelTolerance) {
    fail(ErrorCode::KernelMismatch, "approx_check: X has kernel directions outside the kernel of Y");
  }
  result.holds = result.bounds.lambda_min >= 1.0 - eps - kBoundSlack &&
                 result.bounds.lambda_max <= 1.0 + eps + kBoundSlack;
  return result;
}

PencilBounds pencil_bounds(const MatrixXd& x, const MatrixXd& y) { return approx_check(x, y, 0.0).bounds; }

SchurOutcome schur_complement_check(const PosDiag& d1, const PosDiag& d2, const MatrixXd& m,
                                    const MatrixXd& q, double eps) {
  const Index n1 = static_cast<Index>(d1.dim());
  const Index n2 = static_cast<Index>(d2.dim());
  require(m.rows() == n2 && m.cols() == n1 && q.rows() == n2 && q.cols() == n1,
          ErrorCode::DimensionMismatch, "schur_complement_check: block shapes differ");

  auto block = [&](const MatrixXd& off) {
    MatrixXd out = MatrixXd::Zero(n1 + n2, n1 + n2);
    out.topLeftCorner(n1, n1) = d1.to_dense();
    out.bottomRightCorner(n2, n2) = d2.to_dense();
    out.bottomLeftCorner(n2, n1) = -off;
    out.topRightCorner(n1, n2) = -off.transpose();
    return out;
  };
  const MatrixXd xm = block(m);
  const MatrixXd xq = block(q);
  if (!is_psd(xm) || !is_psd(xq)) fail(ErrorCode::NotPSD, "schur_complement_check: block matrix not PSD");

  SchurOutcome outcome;
  try {
    outcome.premise = approx_check(xm, xq, eps).holds;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::KernelMismatch) throw;
    outcome.premise = false;
  }
  if (!outcome.premise) return outcome;

  const MatrixXd d1inv = d1.to_dense().inverse();
  const MatrixXd sm = d2.to_dense() - m * d1inv * m.transpose();
  const MatrixXd sq = d2.to_dense() - q * d1inv * q.transpose();
  try {
    outcome.conclusion = approx_check(sm, sq, eps).holds;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::KernelMismatch) throw;
    outcome.conclusion = false;
  }
  return outcome;
}

double normalized_spectral_radius(const PosDiag& d, const SparseSym& m) {
  require(d.dim() == m.dim(), ErrorCode::DimensionMismatch, "normalized_spectral_radius");
  check_dense_size(m.dim(), "normalized_spectral_radius");
  if (m.stored_entries() == 0) return 0.0;
  const VectorXd s =
      Eigen::Map<const VectorXd>(d.values().data(), static_cast<Index>(d.dim())).cwiseSqrt().cwiseInverse();
  const MatrixXd x = s.asDiagonal() * m.to_dense() * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(x, Eigen::EigenvaluesOnly);
  return spectral_scale(solver.eigenvalues());
}

MatrixXd pseudo_inverse(const MatrixXd& x) {
  check_dense_size(static_cast<std::size_t>(x.rows()), "pseudo_inverse");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetrized(x));
  const VectorXd& ev = solver.eigenvalues();
  const double cut = kKernelTolerance * spectral_scale(ev);
  VectorXd inv = VectorXd::Zero(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut) inv(i) = 1.0 / ev(i);
  }
  const MatrixXd& v = solver.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

}  // namespace polysparse::oracle
