#include "polysparse/markov_apps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "polysparse/poly_sparsify.hpp"
#include "polysparse/spectral_oracle.hpp"

namespace polysparse {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<std::size_t> canonical_subset(std::size_t n, std::vector<std::size_t> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (!s.empty() && s.back() >= n) {
    fail(ErrorCode::IndexOutOfRange, "subset vertex " + std::to_string(s.back()) + " outside dimension " + std::to_string(n));
  }
  return s;
}

Vector apply_level(const InverseChain& chain, std::size_t k, std::span<const double> b) {
  const PosDiag& d = chain.d;
  const SparseSym& m = chain.levels[k];
  const Vector dinv_b = d.solve(b);
  // (I + M D^-1) b
  Vector lifted = m.multiply(dinv_b);
  for (std::size_t i = 0; i < lifted.size(); ++i) lifted[i] += b[i];
  // The level after the last is replaced by D.
  const Vector inner = k + 1 < chain.levels.size() ? apply_level(chain, k + 1, lifted) : d.solve(lifted);
  const Vector back = d.solve(m.multiply(inner));
  Vector z(b.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.5 * (dinv_b[i] + inner[i] + back[i]);
  return z;
}

}  // namespace

SubsetIndicator::SubsetIndicator(const PosDiag& d, std::vector<std::size_t> members)
    : n_(d.dim()), members_(canonical_subset(d.dim(), std::move(members))) {
  if (members_.empty()) fail(ErrorCode::EmptySubset, "subset is empty");
  for (std::size_t v : members_) {
    weights_.push_back(d[v]);
    mu_ += d[v];
  }
}

bool SubsetIndicator::contains(std::size_t v) const { return std::binary_search(members_.begin(), members_.end(), v); }

Vector SubsetIndicator::xi() const {
  Vector out(n_, 0.0);
  const double scale = 1.0 / std::sqrt(mu_);
  for (std::size_t v : members_) out[v] = scale;
  return out;
}

Vector SubsetIndicator::pi() const {
  Vector out(n_, 0.0);
  for (std::size_t k = 0; k < members_.size(); ++k) out[members_[k]] = weights_[k] / mu_;
  return out;
}

Vector SubsetIndicator::complement_indicator() const {
  Vector out(n_, 1.0);
  for (std::size_t v : members_) out[v] = 0.0;
  return out;
}

Vector escape_probabilities(const TMatrix& b, std::span<const double> gamma, const std::vector<std::size_t>& s) {
  require(!gamma.empty(), ErrorCode::InvalidParameter, "escape: empty coefficient vector");
  const std::size_t n = b.dim();
  const std::vector<std::size_t> members = canonical_subset(n, s);
  Vector outside(n, 1.0);
  for (std::size_t v : members) outside[v] = 0.0;

  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = gamma.back() * outside[i];
  for (std::size_t k = gamma.size() - 1; k-- > 0;) {
    y = b.d().solve(b.m().multiply(y));
    for (std::size_t i = 0; i < n; ++i) y[i] += gamma[k] * outside[i];
  }
  return y;
}

double escape_prob_exact(const TMatrix& b, std::span<const double> gamma, std::size_t v,
                         const std::vector<std::size_t>& s) {
  require(v < b.dim(), ErrorCode::IndexOutOfRange, "escape: vertex outside dimension");
  if (std::find(s.begin(), s.end(), v) == s.end()) {
    fail(ErrorCode::VertexNotInSet, "vertex " + std::to_string(v) + " is not in S");
  }
  return escape_probabilities(b, gamma, s)[v];
}

double egep_exact(const TMatrix& b, std::span<const double> gamma, const std::vector<std::size_t>& s) {
  const SubsetIndicator subset(b.d(), s);
  const Vector y = escape_probabilities(b, gamma, subset.members());
  const Vector pi = subset.pi();
  double total = 0.0;
  for (std::size_t v : subset.members()) total += pi[v] * y[v];
  return total;
}

double egep_estimate(const PosDiag& d, const SparseSym& a_hat, const std::vector<std::size_t>& s) {
  require(d.dim() == a_hat.dim(), ErrorCode::DimensionMismatch, "egep_estimate");
  const SubsetIndicator subset(d, s);
  const Vector xi = subset.xi();
  const Vector dx = d.multiply(xi);
  const Vector ax = a_hat.multiply(xi);
  double q = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) q += xi[i] * (dx[i] - ax[i]);
  return q;
}

double estimate_condition(const TMatrix& b) {
  check_dense_size(b.dim(), "estimate_condition");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b.to_dense(), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  require(ev(0) > 0.0, ErrorCode::NotPSD, "estimate_condition: matrix is singular");
  return ev(ev.size() - 1) / ev(0);
}

InverseChain build_inverse_chain(const TMatrix& b, double eps, double kappa_bound, std::uint64_t seed,
                                 const SparsifyOptions& opts) {
  require(b.kind() == TKind::SDDM, ErrorCode::InvalidParameter, "build_inverse_chain: input must be SDDM");
  require(eps > 0.0 && eps < 1.0, ErrorCode::InvalidParameter, "build_inverse_chain: eps must lie in (0, 1)");
  require(std::isfinite(kappa_bound) && kappa_bound >= 1.0, ErrorCode::InvalidParameter,
          "build_inverse_chain: kappa bound must be >= 1");

  InverseChain chain;
  chain.d = b.d();
  chain.kappa_bound = kappa_bound;
  if (b.m().stored_entries() == 0) return chain;

  const double t = (1.0 + eps / 8.0) / (1.0 - eps / 8.0) * kappa_bound;
  const double log_t = std::log2(t);
  const auto k_target = static_cast<std::size_t>(std::max(1.0, std::ceil(log_t)));
  const double eps_prime = eps / (16.0 * std::max(1.0, log_t));
  constexpr double kTerminal = 0.25;

  chain.levels.push_back(mklc(b, eps / 16.0, derive_seed(seed, 0), opts).m());
  chain.terminal_norm = oracle::normalized_spectral_radius(chain.d, chain.levels.back());
  while (chain.terminal_norm > kTerminal) {
    const std::size_t next = chain.levels.size();
    if (next > 2 * k_target) {
      fail(ErrorCode::KappaTooSmall, "inverse chain did not reach the terminal level within " +
                                         std::to_string(2 * k_target) + " squarings (kappa bound " +
                                         std::to_string(kappa_bound) + ")");
    }
    SparseSym level = next == 1 ? mps(build_tmatrix(chain.d, chain.levels.back()), eps / 8.0, derive_seed(seed, 1), opts).m()
                                : sqr_ss(chain.d, chain.levels.back(), eps_prime, derive_seed(seed, next), opts);
    chain.levels.push_back(std::move(level));
    chain.terminal_norm = oracle::normalized_spectral_radius(chain.d, chain.levels.back());
  }
  return chain;
}

Vector apply_chain(const InverseChain& chain, std::span<const double> b) {
  require(b.size() == chain.d.dim(), ErrorCode::DimensionMismatch, "apply_chain");
  if (chain.levels.empty()) return chain.d.solve(b);
  return apply_level(chain, 0, b);
}

SolveResult solve_sddm(const TMatrix& b, std::span<const double> rhs, double eps, const InverseChain& chain) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::InvalidParameter, "solve_sddm: eps must lie in (0, 1)");
  require(rhs.size() == b.dim() && chain.d.dim() == b.dim(), ErrorCode::DimensionMismatch, "solve_sddm");
  const std::size_t n = b.dim();
  SolveResult out;
  out.x.assign(n, 0.0);
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) return out;

  const auto max_iter = static_cast<std::size_t>(200.0 * std::ceil(std::log(1.0 / eps)));
  Vector r(rhs.begin(), rhs.end());
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const Vector z = apply_chain(chain, r);
    if (iter == 0) {
      const Vector bz = b.multiply(z);
      double best = std::numeric_limits<double>::infinity();
      for (double theta : std::array{0.25, 0.5, 0.75, 1.0}) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (r[i] - theta * bz[i]) * (r[i] - theta * bz[i]);
        if (s < best) {
          best = s;
          out.theta = theta;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.x[i] += out.theta * z[i];
    const Vector bx = b.multiply(out.x);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - bx[i];
    out.residual = norm2(r) / rhs_norm;
    out.history.push_back(out.residual);
    out.iterations = iter + 1;
    if (out.residual <= eps) return out;
  }
  fail(ErrorCode::NoConvergence, "Richardson iteration stalled at relative residual " + std::to_string(out.residual) +
                                     " after " + std::to_string(max_iter) + " iterations");
}

}  // namespace polysparse
