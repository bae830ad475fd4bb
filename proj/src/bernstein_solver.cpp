#include "polysparse/bernstein_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polysparse/mdbd.hpp"

namespace polysparse {

namespace {

void check_gaps(std::span<const double> nodes) {
  Vector sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 1; j < sorted.size(); ++j) {
    if (sorted[j] - sorted[j - 1] < kNodeGap) {
      fail(ErrorCode::NodeCollision, "nodes " + std::to_string(sorted[j - 1]) + " and " + std::to_string(sorted[j]) +
                                         " are closer than the minimum gap");
    }
  }
}

// Dual Bjorck-Pereyra recurrences, no checks.
Vector bjorck_pereyra(std::span<const double> x, std::span<const double> rhs) {
  const std::size_t size = x.size();
  Vector b(rhs.begin(), rhs.end());
  if (size <= 1) return b;
  const std::size_t n = size - 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = n; i >= k + 1; --i) b[i] -= x[k] * b[i - 1];
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t i = k + 1; i <= n; ++i) b[i] /= (x[i] - x[i - k - 1]);
    for (std::size_t i = k; i < n; ++i) b[i] -= b[i + 1];
  }
  return b;
}

double relative_vandermonde_residual(std::span<const double> x, std::span<const double> sol,
                                     std::span<const double> rhs) {
  double err = 0.0;
  double scale = 0.0;
  Vector powers(x.size(), 1.0);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      row += powers[j] * sol[j];
      powers[j] *= x[j];
    }
    err = std::max(err, std::abs(row - rhs[i]));
    scale = std::max(scale, std::abs(rhs[i]));
  }
  return scale > 0.0 ? err / scale : err;
}

}  // namespace

Vector solve_transpose_vandermonde(std::span<const double> nodes, std::span<const double> rhs) {
  require(nodes.size() == rhs.size(), ErrorCode::DimensionMismatch, "solve_transpose_vandermonde");
  for (double v : nodes) require(std::isfinite(v), ErrorCode::InvalidParameter, "non-finite node");
  check_gaps(nodes);
  if (std::all_of(rhs.begin(), rhs.end(), [](double v) { return v == 0.0; })) return Vector(rhs.size(), 0.0);
  const Vector sol = bjorck_pereyra(nodes, rhs);
  const double residual = relative_vandermonde_residual(nodes, sol, rhs);
  if (!(residual <= kSolveTolerance)) {
    fail(ErrorCode::IllConditioned, "Vandermonde solve residual " + std::to_string(residual));
  }
  return sol;
}

Eigen::MatrixXd bernstein_matrix(std::span<const double> p) {
  require(!p.empty(), ErrorCode::InvalidParameter, "bernstein_matrix: no nodes");
  const std::size_t n = p.size() - 1;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(n + 1));
  for (std::size_t j = 0; j < p.size(); ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = bernstein(n, i, p[j]);
    }
  }
  return out;
}

Recovery recover_alpha(std::span<const double> p, std::span<const double> gamma) {
  require(!p.empty(), ErrorCode::InvalidParameter, "recover_alpha: no nodes");
  require(p.size() == gamma.size(), ErrorCode::DimensionMismatch, "recover_alpha: need exactly N + 1 nodes");
  for (double v : p) require(v > 0.0 && v < 1.0, ErrorCode::InvalidParameter, "recover_alpha: nodes must lie in (0, 1)");
  for (double g : gamma) {
    require(std::isfinite(g) && g > 0.0, ErrorCode::InvalidParameter, "recover_alpha: gamma must be positive");
  }
  check_gaps(p);
  check_dense_size(p.size(), "recover_alpha");
  const std::size_t n = p.size() - 1;
  const auto nd = static_cast<double>(n);

  // B = D_p V D_CN with x_j = p_j / (1 - p_j); nodes are scaled by their
  // maximum and every diagonal factor is applied in log space.
  Vector log_x(p.size());
  double log_scale = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.size(); ++j) {
    log_x[j] = std::log(p[j]) - std::log1p(-p[j]);
    log_scale = std::max(log_scale, log_x[j]);
  }
  Vector nodes(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) nodes[j] = std::exp(log_x[j] - log_scale);
  Vector rhs(p.size());
  for (std::size_t i = 0; i <= n; ++i) {
    rhs[i] = std::exp(std::log(gamma[i]) - log_binomial(n, i) - static_cast<double>(i) * log_scale);
  }
  const Vector y = solve_transpose_vandermonde(nodes, rhs);

  Recovery out;
  out.alpha.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double log_dp = nd * std::log1p(-p[j]);
    out.alpha[j] = y[j] * std::exp(-log_dp);
  }

  const Eigen::MatrixXd bmat = bernstein_matrix(p);
  const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(out.alpha.data(), static_cast<Eigen::Index>(p.size()));
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(gamma.data(), static_cast<Eigen::Index>(p.size()));
  out.residual = (bmat.transpose() * a - g).lpNorm<Eigen::Infinity>() / g.lpNorm<Eigen::Infinity>();

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
  const Eigen::MatrixXd inv = lu.inverse();
  auto inf_norm = [](const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); };
  out.condition = lu.isInvertible() ? inf_norm(bmat) * inf_norm(inv) : std::numeric_limits<double>::infinity();

  // The residual alone cannot see forward error on an exponentially
  // ill-conditioned system, so the condition estimate gates it as well.
  const double forward_bound = out.condition * static_cast<double>(n + 1) * std::numeric_limits<double>::epsilon();
  if (!(out.residual <= kSolveTolerance) || !(forward_bound <= kSolveTolerance)) {
    fail(ErrorCode::IllConditioned, "recover_alpha: residual " + std::to_string(out.residual) +
                                        ", condition estimate " + std::to_string(out.condition));
  }
  out.valid = std::all_of(out.alpha.begin(), out.alpha.end(), [](double v) { return v > 0.0 && v < 1.0; });
  return out;
}

}  // namespace polysparse
