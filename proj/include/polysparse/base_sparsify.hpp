#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polysparse/matrix_core.hpp"

namespace polysparse {

/// Derives an independent stream seed from (seed, stream) with splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct SparsifyOptions {
  /// Oversampling constant C_s in q = ceil(C_s * eps^-2 * n * ln n).
  double oversampling = 4.0;
  /// Sample even when the input already has at most q edges.
  bool force_sampling = false;
  /// Cliques with at most this many members are always materialized.
  std::size_t clique_threshold = 32;
};

/// ceil(C_s * eps^-2 * n * ln n); the edge budget of one sparsification call.
std::size_t sample_budget(std::size_t n, double eps, const SparsifyOptions& opts);

struct EdgeResistance {
  std::size_t i = 0;
  std::size_t j = 0;
  double resistance = 0.0;
};

/// Exact effective resistance of every edge of a Laplacian, through the dense
/// pseudo-inverse. Disconnected graphs are handled per component.
std::vector<EdgeResistance> effective_resistances(const TMatrix& laplacian);

struct EdgeSample {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
  double leverage = 0.0;
  double probability = 0.0;
};

/// Leverage scores w_e * R_eff(e) of the off-diagonal part of `adjacency`,
/// normalized into a sampling distribution.
std::vector<EdgeSample> leverage_scores(const SparseSym& adjacency);

/// Laplacian sparsifier in split form: degrees - adjacency, zero diagonal.
struct LaplacianSparsifier {
  Vector degrees;
  SparseSym adjacency;
};

/// Importance-samples q edges by leverage score, with replacement, and
/// reweights each draw by w / (q * prob). Self-loops of A are split off first,
/// so D - A only needs to be a Laplacian up to diagonal mass.
LaplacianSparsifier sample_sparsifier(const PosDiag& d, const SparseSym& a, double eps, std::uint64_t seed,
                                      const SparsifyOptions& opts = {});

/// A_hat = (D - Dt / (1 + eps)) + At / (1 + eps), so that D - A_hat equals
/// (Dt - At) / (1 + eps). Throws NegativeDiagonalResidue when Dt exceeds
/// (1 + eps) D beyond rounding.
SparseSym normalize_sparsifier(const PosDiag& d, std::span<const double> d_tilde, const SparseSym& a_tilde,
                               double eps);

/// Sparsifier of D - M that keeps the original D: D - M_hat ~eps D - M.
TMatrix mklc(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts = {});

/// One implicit clique of the two-hop decomposition. Its Laplacian is
/// (s / scale) diag(eta) - eta eta^T / scale over `members`.
struct TwoHopClique {
  std::size_t center = 0;
  std::vector<std::size_t> members;
  std::vector<double> eta;
  double d = 0.0;      ///< <M_{center,:}, 1>
  double s = 0.0;      ///< d - M_{center,center}
  double scale = 0.0;  ///< D_{center,center}
};

/// D - M D^-1 M = diag(d1) + L_B + sum_k L_{N_k}.
struct TwoHopDecomposition {
  std::size_t n = 0;
  Vector d1;
  /// Off-diagonal weights (M_ii/D_ii + M_jj/D_jj) M_ij of the Laplacian L_B.
  SparseSym b_part;
  std::vector<TwoHopClique> cliques;

  Eigen::MatrixXd clique_laplacian(std::size_t index) const;
  /// Dense reassembly of the sum.
  Eigen::MatrixXd to_dense() const;
};

TwoHopDecomposition two_hop_decompose(const TMatrix& b);

/// Sparsifier of the two-hop matrix in normalized form:
/// D - M_hat ~eps D - M D^-1 M, same D.
TMatrix mps(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts = {});

}  // namespace polysparse
