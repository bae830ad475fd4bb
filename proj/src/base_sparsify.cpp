#include "polysparse/base_sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "polysparse/spectral_oracle.hpp"

namespace polysparse {

namespace {

void check_eps(double eps, const char* where) {
  if (!(eps > 0.0 && eps < 1.0)) {
    fail(ErrorCode::InvalidParameter, std::string(where) + ": eps must lie in (0, 1), got " + std::to_string(eps));
  }
}

struct SampledLaplacian {
  LaplacianSparsifier sparsifier;
  /// Error actually incurred: 0 when the input was returned unchanged.
  double achieved_eps = 0.0;
};

// Sparsifies the Laplacian deg(A) - A of a zero-diagonal adjacency.
SampledLaplacian sample_laplacian(const SparseSym& adjacency, double eps, std::uint64_t seed,
                                  const SparsifyOptions& opts) {
  const std::size_t n = adjacency.dim();
  const std::size_t q = sample_budget(n, eps, opts);
  const std::size_t edges = adjacency.edge_count();
  if (edges == 0 || (edges <= q && !opts.force_sampling)) {
    return {{adjacency.row_sums(), adjacency}, 0.0};
  }

  const std::vector<EdgeSample> samples = leverage_scores(adjacency);
  std::vector<double> probs;
  probs.reserve(samples.size());
  for (const EdgeSample& s : samples) probs.push_back(s.probability);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  std::vector<std::size_t> counts(samples.size(), 0);
  for (std::size_t draw = 0; draw < q; ++draw) ++counts[pick(rng)];

  std::vector<Triplet> kept;
  const auto qd = static_cast<double>(q);
  for (std::size_t e = 0; e < samples.size(); ++e) {
    if (counts[e] == 0) continue;
    const EdgeSample& s = samples[e];
    kept.push_back({s.i, s.j, static_cast<double>(counts[e]) * s.weight / (qd * s.probability)});
  }
  SparseSym sparse = SparseSym::from_triplets(n, std::move(kept));
  Vector degrees = sparse.row_sums();
  return {{std::move(degrees), std::move(sparse)}, eps};
}

// Normalization against an arbitrary nonnegative base diagonal.
SparseSym normalize_against(std::span<const double> base, std::span<const double> d_tilde,
                            const SparseSym& a_tilde, double eps) {
  const std::size_t n = base.size();
  require(d_tilde.size() == n && a_tilde.dim() == n, ErrorCode::DimensionMismatch, "normalize_sparsifier");
  require(std::isfinite(eps) && eps >= 0.0, ErrorCode::InvalidParameter, "normalize_sparsifier: eps must be >= 0");
  const double shrink = 1.0 / (1.0 + eps);
  std::vector<Triplet> entries;
  entries.reserve(n + a_tilde.stored_entries());
  for (std::size_t i = 0; i < n; ++i) {
    const double residue = base[i] - shrink * d_tilde[i];
    if (residue < -1e-9 * std::max(base[i], d_tilde[i])) {
      fail(ErrorCode::NegativeDiagonalResidue,
           "row " + std::to_string(i) + ": D=" + std::to_string(base[i]) +
               " < D_tilde/(1+eps)=" + std::to_string(shrink * d_tilde[i]));
    }
    if (residue > 0.0) entries.push_back({i, i, residue});
  }
  for (const Triplet& t : a_tilde.entries()) entries.push_back({t.row, t.col, shrink * t.weight});
  return SparseSym::from_triplets(n, std::move(entries));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL));
}

std::size_t sample_budget(std::size_t n, double eps, const SparsifyOptions& opts) {
  check_eps(eps, "sample_budget");
  require(opts.oversampling > 0.0, ErrorCode::InvalidParameter, "oversampling constant must be positive");
  if (n < 2) return 0;
  const double nd = static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(opts.oversampling * nd * std::log(nd) / (eps * eps)));
}

std::vector<EdgeResistance> effective_resistances(const TMatrix& laplacian) {
  require(laplacian.kind() == TKind::Laplacian, ErrorCode::InvalidParameter,
          "effective_resistances: input is not a Laplacian");
  check_dense_size(laplacian.dim(), "effective_resistances");
  const Eigen::MatrixXd pinv = oracle::pseudo_inverse(laplacian.to_dense());
  std::vector<EdgeResistance> out;
  for (const Triplet& t : laplacian.m().entries()) {
    if (t.row == t.col) continue;
    const auto i = static_cast<Eigen::Index>(t.row);
    const auto j = static_cast<Eigen::Index>(t.col);
    out.push_back({t.row, t.col, pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j)});
  }
  return out;
}

std::vector<EdgeSample> leverage_scores(const SparseSym& adjacency) {
  const SparseSym off = adjacency.off_diagonal();
  check_dense_size(off.dim(), "leverage_scores");
  const Eigen::MatrixXd lap = Eigen::MatrixXd(Eigen::VectorXd::Map(off.row_sums().data(),
                                                                   static_cast<Eigen::Index>(off.dim()))
                                                  .asDiagonal()) -
                              off.to_dense();
  const Eigen::MatrixXd pinv = oracle::pseudo_inverse(lap);
  std::vector<EdgeSample> out;
  out.reserve(off.stored_entries());
  double total = 0.0;
  for (const Triplet& t : off.entries()) {
    const auto i = static_cast<Eigen::Index>(t.row);
    const auto j = static_cast<Eigen::Index>(t.col);
    const double r = std::max(0.0, pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j));
    const double lev = t.weight * r;
    out.push_back({t.row, t.col, t.weight, lev, 0.0});
    total += lev;
  }
  for (EdgeSample& s : out) s.probability = total > 0.0 ? s.leverage / total : 1.0 / static_cast<double>(out.size());
  return out;
}

LaplacianSparsifier sample_sparsifier(const PosDiag& d, const SparseSym& a, double eps, std::uint64_t seed,
                                      const SparsifyOptions& opts) {
  check_eps(eps, "sample_sparsifier");
  require(d.dim() == a.dim(), ErrorCode::DimensionMismatch, "sample_sparsifier");
  const Vector sums = a.row_sums();
  const double tol = dominance_tolerance(d);
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (std::abs(sums[i] - d[i]) > tol) {
      fail(ErrorCode::InvalidParameter, "sample_sparsifier: D - A is not a Laplacian at row " + std::to_string(i));
    }
  }
  return sample_laplacian(a.off_diagonal(), eps, seed, opts).sparsifier;
}

SparseSym normalize_sparsifier(const PosDiag& d, std::span<const double> d_tilde, const SparseSym& a_tilde,
                               double eps) {
  require(d.dim() == d_tilde.size(), ErrorCode::DimensionMismatch, "normalize_sparsifier");
  return normalize_against(d.values(), d_tilde, a_tilde, eps);
}

TMatrix mklc(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts) {
  check_eps(eps, "mklc");
  const SparseSym off = b.m().off_diagonal();
  if (off.stored_entries() == 0) return b;

  // B = D1 + (deg(M') - M') with M' the off-diagonal part; only the Laplacian
  // part is sampled, D1 and the self-loops of M pass through untouched.
  const SampledLaplacian sampled = sample_laplacian(off, eps / 2.0, seed, opts);
  const Vector degrees = off.row_sums();
  const SparseSym normalized =
      normalize_against(degrees, sampled.sparsifier.degrees, sampled.sparsifier.adjacency, sampled.achieved_eps);
  return build_tmatrix(b.d(), normalized + SparseSym::diagonal(b.m().diagonal_values()));
}

Eigen::MatrixXd TwoHopDecomposition::clique_laplacian(std::size_t index) const {
  const TwoHopClique& c = cliques.at(index);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < c.members.size(); ++a) {
    const auto ia = static_cast<Eigen::Index>(c.members[a]);
    out(ia, ia) += c.s * c.eta[a] / c.scale;
    for (std::size_t b = 0; b < c.members.size(); ++b) {
      const auto ib = static_cast<Eigen::Index>(c.members[b]);
      out(ia, ib) -= c.eta[a] * c.eta[b] / c.scale;
    }
  }
  return out;
}

Eigen::MatrixXd TwoHopDecomposition::to_dense() const {
  Eigen::MatrixXd out = Eigen::VectorXd::Map(d1.data(), static_cast<Eigen::Index>(n)).asDiagonal();
  const Eigen::MatrixXd bw = b_part.to_dense();
  out -= bw;
  out.diagonal() += bw.rowwise().sum();
  for (std::size_t k = 0; k < cliques.size(); ++k) out += clique_laplacian(k);
  return out;
}

TwoHopDecomposition two_hop_decompose(const TMatrix& b) {
  const std::size_t n = b.dim();
  const PosDiag& d = b.d();
  const SparseSym& m = b.m();
  const Vector diag = m.diagonal_values();
  const Vector rows = m.row_sums();

  TwoHopDecomposition out;
  out.n = n;

  // d1 = [D - M D^-1 M] 1, computed with two sparse products.
  const Vector inner = d.solve(rows);
  const Vector two_hop_rows = m.multiply(inner);
  out.d1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = d[i] - two_hop_rows[i];
    if (v < -1e-9 * d[i]) {
      fail(ErrorCode::DominanceViolation, "two_hop_decompose: negative row sum at " + std::to_string(i));
    }
    out.d1[i] = std::max(v, 0.0);
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency(n);
  std::vector<Triplet> b_entries;
  for (const Triplet& t : m.entries()) {
    if (t.row == t.col) continue;
    adjacency[t.row].emplace_back(t.col, t.weight);
    adjacency[t.col].emplace_back(t.row, t.weight);
    const double w = (diag[t.row] / d[t.row] + diag[t.col] / d[t.col]) * t.weight;
    if (w > 0.0) b_entries.push_back({t.row, t.col, w});
  }
  out.b_part = SparseSym::from_triplets(n, std::move(b_entries));

  for (std::size_t k = 0; k < n; ++k) {
    auto& nbrs = adjacency[k];
    if (nbrs.size() < 2) continue;
    std::sort(nbrs.begin(), nbrs.end());
    TwoHopClique c;
    c.center = k;
    c.d = rows[k];
    c.s = rows[k] - diag[k];
    c.scale = d[k];
    for (const auto& [j, w] : nbrs) {
      c.members.push_back(j);
      c.eta.push_back(w);
    }
    out.cliques.push_back(std::move(c));
  }
  return out;
}

TMatrix mps(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts) {
  check_eps(eps, "mps");
  const std::size_t n = b.dim();
  const TwoHopDecomposition dec = two_hop_decompose(b);

  // Error budget: cliques and the union are each sampled at eps/5; the
  // composed factor (1 +- eps/5)^2 then normalizes into ~eps.
  const double part_eps = eps / 5.0;
  std::vector<Triplet> union_entries(dec.b_part.entries().begin(), dec.b_part.entries().end());
  double clique_eps = 0.0;
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));

  for (std::size_t idx = 0; idx < dec.cliques.size(); ++idx) {
    const TwoHopClique& c = dec.cliques[idx];
    const std::size_t size = c.members.size();
    const std::size_t pairs = size * (size - 1) / 2;
    // Leverage upper bounds inside the clique sum to size - 1.
    const auto budget = static_cast<std::size_t>(
        std::ceil(opts.oversampling * static_cast<double>(size - 1) * log_n / (part_eps * part_eps)));
    const bool sample = size > opts.clique_threshold && (pairs > budget || opts.force_sampling);
    if (!sample) {
      for (std::size_t a = 0; a < size; ++a) {
        for (std::size_t bb = a + 1; bb < size; ++bb) {
          union_entries.push_back({c.members[a], c.members[bb], c.eta[a] * c.eta[bb] / c.scale});
        }
      }
      continue;
    }
    // R_eff(i, j) on the clique alone is (scale / s)(1/eta_i + 1/eta_j), so the
    // leverage bound is (eta_i + eta_j) / s. Drawing i with probability eta_i / s
    // and j uniformly among the rest realizes exactly that distribution.
    clique_eps = part_eps;
    std::mt19937_64 rng(derive_seed(seed, idx + 1));
    std::discrete_distribution<std::size_t> first(c.eta.begin(), c.eta.end());
    std::uniform_int_distribution<std::size_t> second(0, size - 2);
    std::map<std::pair<std::size_t, std::size_t>, double> drawn;
    const double q = static_cast<double>(budget);
    for (std::size_t draw = 0; draw < budget; ++draw) {
      std::size_t a = first(rng);
      std::size_t bb = second(rng);
      if (bb >= a) ++bb;
      if (a > bb) std::swap(a, bb);
      const double prob = (c.eta[a] + c.eta[bb]) / (c.s * static_cast<double>(size - 1));
      drawn[{a, bb}] += c.eta[a] * c.eta[bb] / c.scale / (q * prob);
    }
    for (const auto& [key, w] : drawn) union_entries.push_back({c.members[key.first], c.members[key.second], w});
  }

  const SparseSym union_graph = SparseSym::from_triplets(n, std::move(union_entries));
  const SampledLaplacian sampled = sample_laplacian(union_graph, part_eps, derive_seed(seed, 0), opts);
  const double upward = (1.0 + clique_eps) * (1.0 + sampled.achieved_eps) - 1.0;

  Vector base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = b.d()[i] - dec.d1[i];
  const SparseSym m_hat =
      normalize_against(base, sampled.sparsifier.degrees, sampled.sparsifier.adjacency, upward);
  return build_tmatrix(b.d(), m_hat);
}

}  // namespace polysparse
