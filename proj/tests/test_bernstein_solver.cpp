#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "polysparse/bernstein_solver.hpp"
#include "polysparse/mdbd.hpp"

using namespace polysparse;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

Vector spaced_nodes(std::size_t n) {
  Vector p(n + 1);
  for (std::size_t j = 0; j <= n; ++j) p[j] = (j + 1.0) / (n + 2.0);
  return p;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("transpose Vandermonde examples") {
  const Vector x = solve_transpose_vandermonde(Vector{1.0, 2.0}, Vector{2.0, 3.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));

  const Vector zero = solve_transpose_vandermonde(Vector{0.5, 1.5, 3.0}, Vector{0.0, 0.0, 0.0});
  for (double v : zero) CHECK(v == 0.0);

  CHECK(code_of([] { solve_transpose_vandermonde(Vector{1.0, 1.0}, Vector{1.0, 2.0}); }) == ErrorCode::NodeCollision);
}

TEST_CASE("transpose Vandermonde round trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> node(0.2, 5.0);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector nodes(8);
    Vector truth(8);
    for (std::size_t j = 0; j < 8; ++j) {
      nodes[j] = node(rng);
      truth[j] = val(rng);
    }
    Vector rhs(8, 0.0);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) rhs[i] += std::pow(nodes[j], static_cast<double>(i)) * truth[j];
    }
    Eigen::MatrixXd v(8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) v(i, j) = std::pow(nodes[j], static_cast<double>(i));
    }
    const double kappa = v.lpNorm<Eigen::Infinity>() * v.inverse().lpNorm<Eigen::Infinity>();
    const Vector x = solve_transpose_vandermonde(nodes, rhs);
    // Forward error is limited by conditioning, not by the recurrences.
    CHECK(max_abs_diff(x, truth) <= std::max(1e-8, 10.0 * kappa * std::numeric_limits<double>::epsilon()));
    if (kappa < 1e7) CHECK(max_abs_diff(x, truth) <= 1e-8);
  }
}

TEST_CASE("Bernstein matrix factorization") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (std::size_t n : {1, 5, 12, 20, 30}) {
    Vector p(n + 1);
    for (double& v : p) v = u(rng);
    const Eigen::MatrixXd bm = bernstein_matrix(p);
    for (std::size_t j = 0; j <= n; ++j) {
      const double x = p[j] / (1.0 - p[j]);
      for (std::size_t i = 0; i <= n; ++i) {
        // (1 - p)^N x^i C(N, i), all in log space.
        const double logv = n * std::log1p(-p[j]) + i * std::log(x) + log_binomial(n, i);
        const double factored = std::exp(logv);
        CHECK(std::abs(bm(j, i) - factored) <= 1e-10 * std::max(factored, 1e-300) + 1e-300);
      }
    }
  }
}

TEST_CASE("recover_alpha examples") {
  const Recovery r = recover_alpha(Vector{1.0 / 3, 2.0 / 3}, Vector{0.3 * 2.0 / 3 + 0.5 / 3, 0.3 / 3 + 0.5 * 2.0 / 3});
  CHECK(std::abs(r.alpha[0] - 0.3) <= 1e-12);
  CHECK(std::abs(r.alpha[1] - 0.5) <= 1e-12);
  CHECK(r.valid);

  const Recovery single = recover_alpha(Vector{0.4}, Vector{0.7});
  CHECK(single.alpha[0] == doctest::Approx(0.7));

  CHECK(code_of([] { recover_alpha(Vector{0.4, 0.4}, Vector{0.3, 0.3}); }) == ErrorCode::NodeCollision);
  CHECK(code_of([] { recover_alpha(Vector{0.4, 0.6}, Vector{0.3, -0.1}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { recover_alpha(Vector{0.4, 1.0}, Vector{0.3, 0.3}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { recover_alpha(Vector{0.4, 0.6}, Vector{0.3}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("round trip through induce_gamma") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      MDBD mix;
      mix.n = n;
      mix.p = spaced_nodes(n);
      double total = 0.0;
      for (std::size_t j = 0; j <= n; ++j) {
        mix.alpha.push_back(u(rng));
        total += mix.alpha.back();
      }
      for (double& a : mix.alpha) a *= 0.9 / total;
      const Recovery r = recover_alpha(mix.p, induce_gamma(mix));
      CHECK(max_abs_diff(r.alpha, mix.alpha) <= 1e-8);
      CHECK(r.valid);
      CHECK(r.residual <= kSolveTolerance);
    }
  }
}

TEST_CASE("large N is reported as ill-conditioned") {
  for (std::size_t n : {20, 30}) {
    MDBD mix;
    mix.n = n;
    mix.p = spaced_nodes(n);
    mix.alpha.assign(n + 1, 0.9 / (n + 1));
    CHECK(code_of([&] { recover_alpha(mix.p, induce_gamma(mix)); }) == ErrorCode::IllConditioned);
  }
}

TEST_CASE("invalid weights are reported raw") {
  // gamma from a signed combination: solvable, but outside the MDBD contract.
  const Vector p{0.25, 0.75};
  const Vector gamma{0.75 * 0.6 - 0.25 * 0.1, 0.25 * 0.6 - 0.75 * 0.1};
  const Recovery r = recover_alpha(p, gamma);
  CHECK(r.alpha[0] == doctest::Approx(0.6));
  CHECK(r.alpha[1] == doctest::Approx(-0.1));
  CHECK_FALSE(r.valid);
}
