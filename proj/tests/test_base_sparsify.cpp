#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "graphs.hpp"
#include "polysparse/base_sparsify.hpp"
#include "polysparse/spectral_oracle.hpp"

using namespace polysparse;
using Eigen::MatrixXd;

namespace {

double resistance_of(const std::vector<EdgeResistance>& rs, std::size_t i, std::size_t j) {
  for (const auto& r : rs) {
    if (r.i == i && r.j == j) return r.resistance;
  }
  FAIL("edge not found");
  return 0.0;
}

MatrixXd two_hop_dense(const TMatrix& b) {
  const MatrixXd d = b.d().to_dense();
  const MatrixXd m = b.m().to_dense();
  return d - m * d.inverse() * m;
}

}  // namespace

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t k = 0; k < 64; ++k) seen.insert(derive_seed(s, k));
  }
  CHECK(seen.size() == 256);
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("sample budget") {
  SparsifyOptions opts;
  // 4 * 100 * 10 * ln 10 = 9210.34...
  CHECK(sample_budget(10, 0.1, opts) == 9211);
  // ln 1 = 0: a single vertex needs no samples.
  CHECK(sample_budget(1, 0.1, opts) == 0);
}

TEST_CASE("effective resistance examples") {
  const auto single = effective_resistances(testgraphs::laplacian(SparseSym::from_triplets(2, {{0, 1, 4.0}})));
  REQUIRE(single.size() == 1);
  CHECK(single[0].resistance == doctest::Approx(0.25));

  const auto tri = effective_resistances(testgraphs::laplacian(testgraphs::complete(3)));
  for (const auto& r : tri) CHECK(r.resistance == doctest::Approx(2.0 / 3.0));

  const auto path = effective_resistances(testgraphs::laplacian(testgraphs::path3()));
  CHECK(resistance_of(path, 0, 1) == doctest::Approx(1.0));
  CHECK(resistance_of(path, 1, 2) == doctest::Approx(1.0));
}

TEST_CASE("leverage scores sum to n - components") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseSym a = testgraphs::erdos_renyi(25, 0.3, seed, 0.5, 2.0);
    const auto samples = leverage_scores(a);
    double lev = 0.0;
    double prob = 0.0;
    for (const auto& s : samples) {
      lev += s.leverage;
      prob += s.probability;
    }
    CHECK(lev == doctest::Approx(24.0).epsilon(1e-9));
    CHECK(prob == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize_sparsifier algebra") {
  const TMatrix b = testgraphs::laplacian(testgraphs::path3());
  const Vector dt{1.0, 2.0, 1.0};
  const SparseSym at = b.m();
  const SparseSym hat = normalize_sparsifier(b.d(), dt, at, 0.1);
  const MatrixXd lhs = b.d().to_dense() - hat.to_dense();
  const MatrixXd rhs = (b.d().to_dense() - at.to_dense()) / 1.1;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
  // Self-loops carry the residue D - Dt / (1 + eps).
  CHECK(hat.to_dense()(1, 1) == doctest::Approx(2.0 - 2.0 / 1.1));

  const Vector too_big{3.0, 2.0, 1.0};
  try {
    normalize_sparsifier(b.d(), too_big, at, 0.1);
    FAIL("expected NegativeDiagonalResidue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeDiagonalResidue);
  }
}

TEST_CASE("short-circuit returns the input unchanged") {
  const TMatrix b = testgraphs::laplacian(testgraphs::erdos_renyi(20, 0.3, 2));
  const TMatrix hat = mklc(b, 0.2, 5);
  CHECK(hat.m() == b.m());
  CHECK(hat.d() == b.d());
}

TEST_CASE("sampled sparsifier approximates the Laplacian") {
  SparsifyOptions opts;
  opts.force_sampling = true;
  int holds = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseSym a = testgraphs::erdos_renyi(30, 0.5, seed, 0.5, 1.5);
    const TMatrix b = testgraphs::laplacian(a);
    const auto sp = sample_sparsifier(b.d(), a, 0.5, seed, opts);
    CHECK(sp.degrees.size() == 30);
    MatrixXd x = -sp.adjacency.to_dense();
    for (std::size_t i = 0; i < 30; ++i) x(i, i) += sp.degrees[i];
    holds += oracle::approx_check(x, b.to_dense(), 0.5).holds ? 1 : 0;
  }
  CHECK(holds == 10);
}

TEST_CASE("sample_sparsifier rejects non-Laplacian input") {
  const SparseSym edge = SparseSym::from_triplets(2, {{0, 1, 1.0}});
  try {
    sample_sparsifier(PosDiag({0.5, 0.5}), edge, 0.1, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParameter);
  }
}

TEST_CASE("mklc keeps D and kind and stays within eps") {
  SparsifyOptions opts;
  opts.force_sampling = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TMatrix lap = testgraphs::laplacian(testgraphs::erdos_renyi(30, 0.5, seed));
    const TMatrix s = testgraphs::with_self_loops(testgraphs::erdos_renyi(30, 0.5, seed), seed);
    for (const TMatrix* b : {&lap, &s}) {
      const TMatrix hat = mklc(*b, 0.5, seed, opts);
      CHECK(hat.d() == b->d());
      CHECK(hat.kind() == b->kind());
      CHECK(oracle::approx_check(hat.to_dense(), b->to_dense(), 0.5).holds);
    }
  }
}

TEST_CASE("mklc is deterministic in the seed") {
  SparsifyOptions opts;
  opts.force_sampling = true;
  const TMatrix b = testgraphs::laplacian(testgraphs::erdos_renyi(20, 0.5, 1));
  CHECK(mklc(b, 0.5, 9, opts).m() == mklc(b, 0.5, 9, opts).m());
  CHECK_FALSE(mklc(b, 0.5, 9, opts).m() == mklc(b, 0.5, 10, opts).m());
}

TEST_CASE("two-hop decomposition reassembles D - M D^-1 M") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const TMatrix lap = testgraphs::laplacian(testgraphs::erdos_renyi(20, 0.3, seed, 0.5, 2.0));
    const TMatrix s = testgraphs::with_self_loops(testgraphs::erdos_renyi(20, 0.3, seed), seed);
    for (const TMatrix* b : {&lap, &s}) {
      const TwoHopDecomposition dec = two_hop_decompose(*b);
      CHECK((dec.to_dense() - two_hop_dense(*b)).cwiseAbs().maxCoeff() < 1e-10);
      for (double v : dec.d1) CHECK(v >= -1e-12);
      for (std::size_t k = 0; k < dec.cliques.size(); ++k) {
        CHECK(dec.cliques[k].members.size() >= 2);
        CHECK(std::is_sorted(dec.cliques[k].members.begin(), dec.cliques[k].members.end()));
        CHECK(oracle::is_psd(dec.clique_laplacian(k)));
      }
    }
  }
}

TEST_CASE("star centre clique") {
  const TMatrix b = testgraphs::laplacian(testgraphs::star(4));
  const TwoHopDecomposition dec = two_hop_decompose(b);
  // Only the centre has two or more neighbours.
  REQUIRE(dec.cliques.size() == 1);
  CHECK(dec.cliques[0].center == 0);
  CHECK(dec.cliques[0].members == std::vector<std::size_t>{1, 2, 3, 4});
  // Clique Laplacian weight eta_i eta_j / D_00 = 1/4 on every pair.
  const MatrixXd l = dec.clique_laplacian(0);
  CHECK(l(1, 2) == doctest::Approx(-0.25));
  CHECK(l(1, 1) == doctest::Approx(0.75));
}

TEST_CASE("mps approximates the two-hop matrix") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const TMatrix lap = testgraphs::laplacian(testgraphs::erdos_renyi(40, 0.3, seed));
    const TMatrix s = testgraphs::sddm(testgraphs::erdos_renyi(40, 0.3, seed), 1.2);
    for (const TMatrix* b : {&lap, &s}) {
      const TMatrix hat = mps(*b, 0.5, seed);
      CHECK(hat.d() == b->d());
      CHECK(hat.kind() == b->kind());
      CHECK(oracle::approx_check(hat.to_dense(), two_hop_dense(*b), 0.5).holds);
    }
  }
}

TEST_CASE("mps with sampled cliques") {
  SparsifyOptions opts;
  opts.clique_threshold = 4;
  opts.force_sampling = true;
  int holds = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const TMatrix b = testgraphs::laplacian(testgraphs::erdos_renyi(30, 0.5, seed));
    const TMatrix hat = mps(b, 0.9, seed, opts);
    CHECK(hat.d() == b.d());
    holds += oracle::approx_check(hat.to_dense(), two_hop_dense(b), 0.9).holds ? 1 : 0;
  }
  CHECK(holds == 4);
}
