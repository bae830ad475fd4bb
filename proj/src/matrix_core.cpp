#include "polysparse/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace polysparse {

namespace {

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": expected dimension " +
                                           std::to_string(expected) + ", got " +
                                           std::to_string(got));
  }
}

}  // namespace

SparseSym SparseSym::from_triplets(std::size_t n, std::vector<Triplet> entries) {
  for (Triplet& t : entries) {
    if (t.row >= n || t.col >= n) {
      fail(ErrorCode::IndexOutOfRange, "entry (" + std::to_string(t.row) + "," +
                                           std::to_string(t.col) + ") outside dimension " +
                                           std::to_string(n));
    }
    if (!std::isfinite(t.weight) || t.weight < 0.0) {
      fail(ErrorCode::InvalidParameter, "entry (" + std::to_string(t.row) + "," +
                                            std::to_string(t.col) +
                                            ") has negative or non-finite weight");
    }
    if (t.row > t.col) std::swap(t.row, t.col);
  }
  // Stable sort keeps the summation order of duplicates fixed by input order.
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseSym out(n);
  out.entries_.reserve(entries.size());
  for (const Triplet& t : entries) {
    if (!out.entries_.empty() && out.entries_.back().row == t.row &&
        out.entries_.back().col == t.col) {
      out.entries_.back().weight += t.weight;
    } else {
      out.entries_.push_back(t);
    }
  }
  std::erase_if(out.entries_, [](const Triplet& t) { return t.weight == 0.0; });
  return out;
}

SparseSym SparseSym::from_dense(const Eigen::MatrixXd& dense, double tol) {
  require(dense.rows() == dense.cols(), ErrorCode::DimensionMismatch,
          "from_dense: matrix is not square");
  const auto n = static_cast<std::size_t>(dense.rows());
  std::vector<Triplet> entries;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = i; j < dense.cols(); ++j) {
      double w = 0.5 * (dense(i, j) + dense(j, i));
      if (std::abs(w) <= tol) continue;
      if (w < 0.0) {
        fail(ErrorCode::InvalidParameter, "from_dense: negative entry at (" + std::to_string(i) +
                                              "," + std::to_string(j) + ")");
      }
      entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
    }
  }
  return from_triplets(n, std::move(entries));
}

SparseSym SparseSym::diagonal(std::span<const double> values) {
  std::vector<Triplet> entries;
  entries.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) entries.push_back({i, i, values[i]});
  return from_triplets(values.size(), std::move(entries));
}

std::size_t SparseSym::nnz() const noexcept {
  std::size_t count = 0;
  for (const Triplet& t : entries_) count += (t.row == t.col) ? 1 : 2;
  return count;
}

std::size_t SparseSym::edge_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const Triplet& t) { return t.row != t.col; }));
}

Vector SparseSym::row_sums() const {
  Vector sums(n_, 0.0);
  for (const Triplet& t : entries_) {
    sums[t.row] += t.weight;
    if (t.row != t.col) sums[t.col] += t.weight;
  }
  return sums;
}

Vector SparseSym::diagonal_values() const {
  Vector diag(n_, 0.0);
  for (const Triplet& t : entries_) {
    if (t.row == t.col) diag[t.row] = t.weight;
  }
  return diag;
}

SparseSym SparseSym::off_diagonal() const {
  SparseSym out(n_);
  out.entries_.reserve(entries_.size());
  for (const Triplet& t : entries_) {
    if (t.row != t.col) out.entries_.push_back(t);
  }
  return out;
}

SparseSym SparseSym::scaled(double factor) const {
  require(std::isfinite(factor) && factor >= 0.0, ErrorCode::InvalidParameter,
          "scaled: factor must be finite and nonnegative");
  if (factor == 0.0) return SparseSym(n_);
  SparseSym out = *this;
  for (Triplet& t : out.entries_) t.weight *= factor;
  return out;
}

Vector SparseSym::multiply(std::span<const double> x) const {
  check_dim(n_, x.size(), "SparseSym::multiply");
  Vector y(n_, 0.0);
  for (const Triplet& t : entries_) {
    y[t.row] += t.weight * x[t.col];
    if (t.row != t.col) y[t.col] += t.weight * x[t.row];
  }
  return y;
}

Eigen::MatrixXd SparseSym::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (const Triplet& t : entries_) {
    const auto r = static_cast<Eigen::Index>(t.row);
    const auto c = static_cast<Eigen::Index>(t.col);
    out(r, c) = t.weight;
    out(c, r) = t.weight;
  }
  return out;
}

SparseSym operator+(const SparseSym& a, const SparseSym& b) {
  check_dim(a.n_, b.n_, "SparseSym addition");
  std::vector<Triplet> merged;
  merged.reserve(a.entries_.size() + b.entries_.size());
  std::merge(a.entries_.begin(), a.entries_.end(), b.entries_.begin(), b.entries_.end(),
             std::back_inserter(merged), [](const Triplet& x, const Triplet& y) {
               return x.row != y.row ? x.row < y.row : x.col < y.col;
             });
  return SparseSym::from_triplets(a.n_, std::move(merged));
}

PosDiag::PosDiag(Vector values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      fail(ErrorCode::InvalidParameter,
           "diagonal entry " + std::to_string(i) + " is not strictly positive and finite");
    }
  }
}

double PosDiag::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

Vector PosDiag::multiply(std::span<const double> x) const {
  check_dim(dim(), x.size(), "PosDiag::multiply");
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = values_[i] * x[i];
  return y;
}

Vector PosDiag::solve(std::span<const double> x) const {
  check_dim(dim(), x.size(), "PosDiag::solve");
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / values_[i];
  return y;
}

Eigen::MatrixXd PosDiag::to_dense() const {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
  return v.asDiagonal();
}

const char* to_string(TKind kind) { return kind == TKind::Laplacian ? "Laplacian" : "SDDM"; }

Vector TMatrix::multiply(std::span<const double> x) const {
  Vector y = d_.multiply(x);
  const Vector mx = m_.multiply(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= mx[i];
  return y;
}

Eigen::MatrixXd TMatrix::to_dense() const { return d_.to_dense() - m_.to_dense(); }

double dominance_tolerance(const PosDiag& d) { return 1e-9 * d.max(); }

TMatrix build_tmatrix(PosDiag d, SparseSym m) {
  check_dim(d.dim(), m.dim(), "build_tmatrix");
  const double tol = dominance_tolerance(d);
  const Vector sums = m.row_sums();
  bool all_tight = true;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const double slack = d[i] - sums[i];
    if (slack < -tol) {
      fail(ErrorCode::DominanceViolation, "row " + std::to_string(i) + ": D_ii=" +
                                              std::to_string(d[i]) + " < row sum " +
                                              std::to_string(sums[i]));
    }
    if (slack > tol) all_tight = false;
  }
  TMatrix out;
  out.d_ = std::move(d);
  out.m_ = std::move(m);
  out.kind_ = all_tight ? TKind::Laplacian : TKind::SDDM;
  return out;
}

Vector matvec(const TMatrix& b, std::span<const double> x) { return b.multiply(x); }
Vector matvec(const SparseSym& m, std::span<const double> x) { return m.multiply(x); }
Vector matvec(const PosDiag& d, std::span<const double> x) { return d.multiply(x); }

bool is_spsd(const SparseSym& m, const PosDiag& d) {
  check_dim(d.dim(), m.dim(), "is_spsd");
  check_dense_size(m.dim(), "is_spsd");
  if (m.stored_entries() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.to_dense(), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -kPsdTolerance * norm;
}

Vector off_diagonal_degrees(const SparseSym& m) { return m.off_diagonal().row_sums(); }

}  // namespace polysparse
