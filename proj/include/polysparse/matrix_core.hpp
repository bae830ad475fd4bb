#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polysparse/error.hpp"

namespace polysparse {

using Vector = std::vector<double>;

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Symmetric nonnegative sparse matrix. Only the upper triangle (row <= col)
/// is stored; the lower triangle is implied by mirroring, so symmetry is exact.
///
/// Entries are canonical: sorted by (row, col), duplicates summed, zeros dropped.
class SparseSym {
 public:
  SparseSym() = default;
  explicit SparseSym(std::size_t n) : n_(n) {}

  /// Canonicalizes arbitrary triplets. Entries below the diagonal are mirrored
  /// into the upper triangle before summation, so (i,j) and (j,i) collapse.
  static SparseSym from_triplets(std::size_t n, std::vector<Triplet> entries);

  /// Reads the upper triangle of a dense symmetric matrix. Entries in
  /// [-tol, tol] are treated as zero; anything more negative is rejected.
  static SparseSym from_dense(const Eigen::MatrixXd& dense, double tol = 0.0);

  static SparseSym diagonal(std::span<const double> values);

  std::size_t dim() const noexcept { return n_; }
  std::span<const Triplet> entries() const noexcept { return entries_; }
  std::size_t stored_entries() const noexcept { return entries_.size(); }
  /// Nonzeros of the full (mirrored) matrix.
  std::size_t nnz() const noexcept;
  /// Number of stored off-diagonal entries (undirected edges).
  std::size_t edge_count() const noexcept;

  Vector row_sums() const;
  Vector diagonal_values() const;
  SparseSym off_diagonal() const;
  SparseSym scaled(double factor) const;

  Vector multiply(std::span<const double> x) const;
  Eigen::MatrixXd to_dense() const;

  friend SparseSym operator+(const SparseSym& a, const SparseSym& b);
  friend bool operator==(const SparseSym&, const SparseSym&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Triplet> entries_;
};

/// Strictly positive diagonal matrix.
class PosDiag {
 public:
  PosDiag() = default;
  explicit PosDiag(Vector values);

  std::size_t dim() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double max() const;

  Vector multiply(std::span<const double> x) const;
  Vector solve(std::span<const double> x) const;
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const PosDiag&, const PosDiag&) = default;

 private:
  Vector values_;
};

enum class TKind { Laplacian, SDDM };

const char* to_string(TKind kind);

/// B = D - M with D positive diagonal and M symmetric nonnegative, diagonally
/// dominant. Construct through build_tmatrix.
class TMatrix {
 public:
  TMatrix() = default;

  const PosDiag& d() const noexcept { return d_; }
  const SparseSym& m() const noexcept { return m_; }
  TKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return d_.dim(); }

  Vector multiply(std::span<const double> x) const;
  /// Dense D - M.
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const TMatrix&, const TMatrix&) = default;

 private:
  friend TMatrix build_tmatrix(PosDiag d, SparseSym m);

  PosDiag d_;
  SparseSym m_;
  TKind kind_ = TKind::Laplacian;
};

/// Relative dominance tolerance: 1e-9 times the largest diagonal entry.
double dominance_tolerance(const PosDiag& d);

/// Validates dimensions and dominance, then classifies the kind. A row is
/// tight when |D_ii - sum_j M_ij| <= dominance_tolerance(D); all rows tight
/// means Laplacian.
TMatrix build_tmatrix(PosDiag d, SparseSym m);

Vector matvec(const TMatrix& b, std::span<const double> x);
Vector matvec(const SparseSym& m, std::span<const double> x);
Vector matvec(const PosDiag& d, std::span<const double> x);

/// Relative PSD tolerance used by is_spsd.
inline constexpr double kPsdTolerance = 1e-10;

/// True iff the smallest eigenvalue of M is >= -kPsdTolerance * ||M||_2.
/// Dense eigensolve; throws SizeLimitExceeded above dense_limit().
bool is_spsd(const SparseSym& m, const PosDiag& d);

/// Row sums of the off-diagonal part of M (weighted degrees, self-loops excluded).
Vector off_diagonal_degrees(const SparseSym& m);

}  // namespace polysparse
