#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "polysparse/matrix_core.hpp"

namespace polysparse {

/// Mixture of T Binomial(N, p_j) laws with weights alpha_j.
struct MDBD {
  std::size_t n = 0;
  std::vector<double> p;
  std::vector<double> alpha;

  std::size_t t() const noexcept { return p.size(); }
  double delta() const;
  /// Throws InvalidParameter / WeightOutOfRange / NodeCollision on a broken mixture.
  void validate() const;
};

double bernstein(std::size_t n, std::size_t i, double x);
double log_binomial(std::size_t n, std::size_t k);

/// order-th derivative of B_{n,i}, as the alternating sum of degree n - order
/// Bernstein polynomials.
double bernstein_derivative(std::size_t n, std::size_t i, std::size_t order, double x);

/// gamma_i = sum_j alpha_j B_{N,i}(p_j), i = 0..N.
Vector induce_gamma(const MDBD& mix);

/// A density on [0, 1] with derivatives up to order 4 and the constants used
/// by the approximation theory: phi >= max w, and w = c * f with 0 <= f <= 1.
struct SmoothPdf {
  std::string name;
  std::function<double(unsigned, double)> eval;
  double phi = 1.0;
  double c = 1.0;

  double operator()(double x) const { return eval(0, x); }
  double derivative(unsigned order, double x) const { return eval(order, x); }
  double f(double x) const { return eval(0, x) / c; }
};

SmoothPdf uniform_pdf();
/// w(x) = k / (1 - e^-k) exp(-k x), k >= 1.
SmoothPdf exponential_pdf(double k);
/// "uniform", "exp:K" or "exponential:K".
SmoothPdf canonical_pdf(std::string_view name);

struct HaldTerms {
  double b1 = 0.0;
  double b2 = 0.0;
};

HaldTerms hald_terms(const SmoothPdf& w, double x);

/// integral |f''| / (8 T^2).
double trapezoid_error_bound(double second_derivative_abs_integral, std::size_t t);

struct PdfFit {
  MDBD mix;
  double s_grid = 0.0;   ///< sum_{i=0}^{N} w(i/N)
  double s_nodes = 0.0;  ///< sum_{j=1}^{T} w(j/(T+1))
  double delta_w = 0.0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

/// T = ceil(N sqrt(max(phi, 1) / eps_i)), p_j = j/(T+1),
/// alpha_j = w(p_j) N / ((T+1) s_grid). Components with alpha outside (0, 1)
/// are dropped and reported.
PdfFit app_dscr_pdf(const SmoothPdf& w, std::size_t n, double eps_i);

struct ResidualRow {
  std::size_t i = 0;
  double normalized_gamma = 0.0;  ///< gamma_i / (1 - delta)
  double target = 0.0;            ///< w(i/N) / s_grid
  double eta_hat = 0.0;           ///< b1/N + b2/N^2
  double deviation = 0.0;         ///< |normalized_gamma - (1 + 2 eta_hat) target|
};

/// Component-wise comparison of the fitted coefficients with the target over i in [3, N-3].
std::vector<ResidualRow> residual_table(const SmoothPdf& w, const PdfFit& fit);

struct ConditionCheck {
  std::string id;
  std::string description;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct PdfConditionReport {
  std::vector<ConditionCheck> checks;
  bool all_pass() const;
};

/// Evaluates the smoothness conditions 1-5 and the shape conditions a-d on a
/// grid of 10 * n0 + 1 points. `omega` is the floor used for condition b.
PdfConditionReport check_pdf_conditions(const SmoothPdf& w, std::size_t n0, double mu, double omega = 0.1);

}  // namespace polysparse
