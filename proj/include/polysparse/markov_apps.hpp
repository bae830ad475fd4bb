#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polysparse/base_sparsify.hpp"
#include "polysparse/matrix_core.hpp"

namespace polysparse {

/// Vertex subset S with its degree mass mu(S) = sum_{u in S} d_u.
class SubsetIndicator {
 public:
  SubsetIndicator(const PosDiag& d, std::vector<std::size_t> members);

  const std::vector<std::size_t>& members() const noexcept { return members_; }
  bool contains(std::size_t v) const;
  double mu() const noexcept { return mu_; }
  /// 1_S / sqrt(mu(S)).
  Vector xi() const;
  /// d_u / mu(S) on S, zero elsewhere.
  Vector pi() const;
  /// 1 on the complement of S.
  Vector complement_indicator() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> members_;
  std::vector<double> weights_;
  double mu_ = 0.0;
};

/// G_gamma 1_{complement of S}, evaluated by Horner on D^-1 M.
Vector escape_probabilities(const TMatrix& b, std::span<const double> gamma, const std::vector<std::size_t>& s);

/// Entry v of escape_probabilities; v must lie in S.
double escape_prob_exact(const TMatrix& b, std::span<const double> gamma, std::size_t v,
                         const std::vector<std::size_t>& s);

/// sum_{v in S} pi_S(v) gEsc(v, S).
double egep_exact(const TMatrix& b, std::span<const double> gamma, const std::vector<std::size_t>& s);

/// xi_S^T (D - A_hat) xi_S.
double egep_estimate(const PosDiag& d, const SparseSym& a_hat, const std::vector<std::size_t>& s);

/// Levels M_hat_1, M_hat_2, M_hat_4, ... sharing one diagonal.
struct InverseChain {
  PosDiag d;
  std::vector<SparseSym> levels;
  double kappa_bound = 1.0;
  /// ||D^-1/2 M_last D^-1/2||_2 of the terminal level (0 for an empty chain).
  double terminal_norm = 0.0;

  std::size_t depth() const noexcept { return levels.size(); }
};

/// lambda_max / lambda_min of an SDDM matrix, dense.
double estimate_condition(const TMatrix& b);

/// Level 0 from mklc at eps/16, level 1 from mps at eps/8, then squarings at
/// eps / (16 log2 t) until ||D^-1/2 M_hat D^-1/2|| <= 1/4.
InverseChain build_inverse_chain(const TMatrix& b, double eps, double kappa_bound, std::uint64_t seed,
                                 const SparsifyOptions& opts = {});

/// Approximately (D - M_hat_1)^-1 b through the recursive chain.
Vector apply_chain(const InverseChain& chain, std::span<const double> b);

struct SolveResult {
  Vector x;
  std::size_t iterations = 0;
  double residual = 0.0;
  double theta = 1.0;
  /// Relative residual after each iteration.
  std::vector<double> history;
};

/// Preconditioned Richardson iteration until ||rhs - B x|| <= eps ||rhs||.
SolveResult solve_sddm(const TMatrix& b, std::span<const double> rhs, double eps, const InverseChain& chain);

}  // namespace polysparse
