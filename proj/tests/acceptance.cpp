// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "graphs.hpp"
#include "polysparse/bernstein_solver.hpp"
#include "polysparse/io.hpp"
#include "polysparse/markov_apps.hpp"
#include "polysparse/mdbd.hpp"
#include "polysparse/poly_sparsify.hpp"
#include "polysparse/spectral_oracle.hpp"

using namespace polysparse;
using Eigen::MatrixXd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

Vector monomial(std::size_t n) {
  Vector g(n + 1, 0.0);
  g[n] = 1.0;
  return g;
}

Vector binomial_pmf(std::size_t n, double p) {
  Vector g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = bernstein(n, i, p);
  return g;
}

bool holds(const TMatrix& hat, const MatrixXd& truth, double eps) {
  return oracle::approx_check(hat.to_dense(), truth, eps).holds;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Outcome monomials() {
  constexpr int kSeeds = 10;
  int worst = kSeeds;
  double slowest = 0.0;
  for (int variant = 0; variant < 2; ++variant) {
    for (std::size_t n : {2, 4, 8}) {
      int passes = 0;
      for (int seed = 0; seed < kSeeds; ++seed) {
        const SparseSym a = testgraphs::erdos_renyi(60, 0.4, 1000 + seed, 0.5, 2.0);
        const TMatrix b = variant == 0 ? testgraphs::laplacian(a) : testgraphs::with_self_loops(a, seed);
        const auto start = Clock::now();
        const PowerResult out = pwr_ss(b, n, 0.4, seed);
        slowest = std::max(slowest, seconds_since(start));
        passes += holds(out.sparsifier, oracle::dense_poly(b, monomial(n)), 0.4) ? 1 : 0;
      }
      worst = std::min(worst, passes);
    }
  }
  return {worst >= 9 && slowest <= 10.0, fmt("min passes %d/10 over 6 configs, slowest run %.3fs", worst, slowest)};
}

Outcome single_binomial() {
  int worst = 10;
  bool spsd_low = true;
  for (double p : {0.25, 0.5, 0.75}) {
    int passes = 0;
    for (int seed = 0; seed < 10; ++seed) {
      const TMatrix b = testgraphs::laplacian(testgraphs::erdos_renyi(60, 0.4, 2000 + seed, 0.5, 2.0));
      const PowerResult out = lazy_ss(b, 8, p, 0.4, seed);
      if (p <= 0.5) spsd_low = spsd_low && out.branch == InitBranch::Spsd;
      passes += holds(out.sparsifier, oracle::dense_poly(b, binomial_pmf(8, p)), 0.4) ? 1 : 0;
    }
    worst = std::min(worst, passes);
  }
  return {worst >= 9 && spsd_low, fmt("min passes %d/10 over p in {0.25,0.5,0.75}, spsd branch for p<=0.5: %s", worst,
                                      spsd_low ? "yes" : "no")};
}

Outcome mixture() {
  const PdfFit fit = app_dscr_pdf(uniform_pdf(), 16, 0.25);
  Vector gamma = induce_gamma(fit.mix);
  for (double& g : gamma) g /= 1.0 - fit.mix.delta();
  const double eps = 0.5;
  const std::size_t n = 40;
  const double budget = 4.0 / (eps * eps) * n * std::log(static_cast<double>(n));
  int passes = 0;
  bool sparse = true;
  for (int seed = 0; seed < 10; ++seed) {
    const TMatrix b = testgraphs::laplacian(testgraphs::erdos_renyi(n, 0.3, 3000 + seed));
    const MixtureResult out = ss_mdbd(b, fit.mix, eps, seed);
    sparse = sparse && static_cast<double>(out.sparsifier.m().nnz()) <= budget;
    passes += holds(out.sparsifier, oracle::dense_poly(b, gamma), eps) ? 1 : 0;
  }
  return {passes >= 9 && sparse,
          fmt("T=%zu delta=%.4f, passes %d/10, nnz within 4 eps^-2 n ln n: %s", fit.mix.t(), fit.mix.delta(), passes,
              sparse ? "yes" : "no")};
}

Outcome uniform_bound() {
  const auto start = Clock::now();
  bool ok = true;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t i = 3; i <= 5; ++i) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= 16; ++j) acc += bernstein(8, i, j / 17.0);
    acc /= 17.0;
    lo = std::min(lo, acc * 9.0);
    hi = std::max(hi, acc * 9.0);
    ok = ok && acc >= 0.75 / 9.0 && acc <= 1.25 / 9.0;
  }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < 1e-3, fmt("9 * value in [%.4f, %.4f], %.1f us", lo, hi, elapsed * 1e6)};
}

Outcome pdf_approximation() {
  const double eps_i = 0.25;
  bool ok = true;
  std::string detail;
  for (const SmoothPdf& w : {uniform_pdf(), exponential_pdf(1.0)}) {
    const PdfFit fit = app_dscr_pdf(w, 32, eps_i);
    const double tol = 2.0 * (2.0 * eps_i) / fit.s_grid;
    double worst = 0.0;
    const auto rows = residual_table(w, fit);
    ok = ok && rows.size() == 27;
    for (const auto& r : rows) worst = std::max(worst, r.deviation);
    ok = ok && worst <= tol;
    detail += fmt("%s max dev %.3e / tol %.3e; ", w.name.c_str(), worst, tol);
  }
  return {ok, detail};
}

Outcome recovery() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double worst = 0.0;
  bool valid = true;
  for (std::size_t n = 1; n <= 12; ++n) {
    MDBD mix;
    mix.n = n;
    double total = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      mix.p.push_back((j + 1.0) / (n + 2.0));
      mix.alpha.push_back(u(rng));
      total += mix.alpha.back();
    }
    for (double& a : mix.alpha) a *= 0.9 / total;
    const Recovery r = recover_alpha(mix.p, induce_gamma(mix));
    valid = valid && r.valid;
    for (std::size_t j = 0; j <= n; ++j) worst = std::max(worst, std::abs(r.alpha[j] - mix.alpha[j]));
  }
  bool raised = false;
  {
    MDBD mix;
    mix.n = 30;
    for (std::size_t j = 0; j <= 30; ++j) {
      mix.p.push_back((j + 1.0) / 32.0);
      mix.alpha.push_back(0.9 / 31.0);
    }
    try {
      recover_alpha(mix.p, induce_gamma(mix));
    } catch (const Error& e) {
      raised = e.code() == ErrorCode::IllConditioned;
    }
  }
  return {worst <= 1e-8 && valid && raised,
          fmt("max |alpha error| %.2e for N<=12, N=30 raises IllConditioned: %s", worst, raised ? "yes" : "no")};
}

Outcome escaping() {
  const TMatrix b = testgraphs::laplacian(testgraphs::erdos_renyi(40, 0.3, 4000));
  const MDBD mix{8, {0.25, 0.5, 0.75}, {0.2, 0.5, 0.3}};
  const double eps = 0.5;
  const MixtureResult out = ss_mdbd(b, mix, eps, 0);
  const Vector gamma = induce_gamma(mix);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double lo = 2.0;
  double hi = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> s;
    while (s.empty() || s.size() == 40) {
      s.clear();
      const double keep = 0.1 + 0.5 * coin(rng);
      for (std::size_t v = 0; v < 40; ++v) {
        if (coin(rng) < keep) s.push_back(v);
      }
    }
    const double ratio = egep_estimate(b.d(), out.sparsifier.m(), s) / egep_exact(b, gamma, s);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {lo >= 1.0 - eps && hi <= 1.0 + eps, fmt("ratios in [%.4f, %.4f] over 20 subsets", lo, hi)};
}

Outcome sddm_solve() {
  const auto max_iter = static_cast<std::size_t>(200.0 * std::ceil(std::log(1e8)));
  int passes = 0;
  std::size_t most = 0;
  double worst_err = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    const TMatrix b = testgraphs::sddm(testgraphs::erdos_renyi(50, 0.3, 5000 + seed), 1.5);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vector rhs(50);
    for (double& v : rhs) v = g(rng);
    try {
      const InverseChain chain = build_inverse_chain(b, 0.5, estimate_condition(b), seed);
      const SolveResult r = solve_sddm(b, rhs, 1e-8, chain);
      const Eigen::VectorXd dense = b.to_dense().ldlt().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), 50));
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.x.data(), 50);
      const double err = (x - dense).norm() / dense.norm();
      worst_err = std::max(worst_err, err);
      most = std::max(most, r.iterations);
      passes += r.residual <= 1e-8 && r.iterations <= max_iter && err <= 1e-6 ? 1 : 0;
    } catch (const Error&) {
    }
  }
  return {passes >= 9, fmt("passes %d/10, max iterations %zu (budget %zu), max rel error vs dense %.2e", passes, most,
                           max_iter, worst_err)};
}

Outcome decomposition() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  int with_loops = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng() % 46;
    const double p = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    const SparseSym a = testgraphs::erdos_renyi(n, p, 6000 + trial, 0.1, 3.0);
    TMatrix b;
    switch (trial % 3) {
      case 0: b = testgraphs::laplacian(a); break;
      case 1: b = testgraphs::sddm(a, 1.3); break;
      default: b = testgraphs::with_self_loops(a, trial); ++with_loops; break;
    }
    const MatrixXd d = b.d().to_dense();
    const MatrixXd m = b.m().to_dense();
    const MatrixXd truth = d - m * d.inverse() * m;
    const double err = (two_hop_decompose(b).to_dense() - truth).norm() / truth.norm();
    worst = std::max(worst, err);
  }
  return {worst <= 1e-8 && with_loops > 0, fmt("max relative error %.2e over 50 matrices (%d with self-loops)", worst,
                                               with_loops)};
}

Outcome determinism() {
  const TMatrix b = testgraphs::with_self_loops(testgraphs::erdos_renyi(40, 0.3, 7000), 3);
  const PdfFit fit = app_dscr_pdf(exponential_pdf(2.0), 16, 0.25);
  const std::string mdbd1 = io::format_mdbd(fit.mix);
  const std::string mdbd2 = io::format_mdbd(app_dscr_pdf(exponential_pdf(2.0), 16, 0.25).mix);
  MixtureOptions serial;
  serial.threads = 1;
  MixtureOptions parallel;
  parallel.threads = 4;
  SparsifyOptions forced;
  forced.force_sampling = true;
  const std::string m1 = io::format_matrix(ss_mdbd(b, fit.mix, 0.5, 42, serial).sparsifier);
  const std::string m2 = io::format_matrix(ss_mdbd(b, fit.mix, 0.5, 42, parallel).sparsifier);
  const std::string s1 = io::format_matrix(mklc(b, 0.5, 42, forced));
  const std::string s2 = io::format_matrix(mklc(b, 0.5, 42, forced));
  const bool ok = mdbd1 == mdbd2 && m1 == m2 && s1 == s2;
  return {ok, fmt("mdbd %s, mixture sparsifier %s, sampled sparsifier %s", mdbd1 == mdbd2 ? "identical" : "differs",
                  m1 == m2 ? "identical" : "differs", s1 == s2 ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"monomial sparsification", monomials},
      {"single binomial", single_binomial},
      {"mixture", mixture},
      {"uniform distribution bound", uniform_bound},
      {"pdf approximation", pdf_approximation},
      {"exact recovery", recovery},
      {"escaping probability", escaping},
      {"sddm solve", sddm_solve},
      {"two-hop decomposition", decomposition},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::printf("criterion %2zu %-28s %s  %s\n", k + 1, criteria[k].first, out.pass ? "PASS" : "FAIL",
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
