#include "polysparse/mdbd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

namespace polysparse {

namespace {

void check_unit(double x, const char* where) {
  if (!(x >= 0.0 && x <= 1.0)) {
    fail(ErrorCode::InvalidParameter, std::string(where) + ": x must lie in [0, 1], got " + std::to_string(x));
  }
}

double max_on_grid(std::size_t points, const std::function<double(double)>& g) {
  double best = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(points - 1);
    best = std::max(best, std::abs(g(x)));
  }
  return best;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double MDBD::delta() const { return 1.0 - std::accumulate(alpha.begin(), alpha.end(), 0.0); }

void MDBD::validate() const {
  require(n >= 1, ErrorCode::InvalidParameter, "MDBD: degree N must be positive");
  require(!p.empty(), ErrorCode::InvalidParameter, "MDBD: empty mixture");
  require(p.size() == alpha.size(), ErrorCode::DimensionMismatch, "MDBD: p and alpha differ in length");
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0 && p[j] < 1.0)) {
      fail(ErrorCode::InvalidParameter, "MDBD: p[" + std::to_string(j) + "] outside (0, 1)");
    }
    // alpha = 1 is admitted so that a single Binomial is a valid mixture.
    if (!(alpha[j] > 0.0 && alpha[j] <= 1.0)) {
      fail(ErrorCode::WeightOutOfRange, "MDBD: alpha[" + std::to_string(j) + "] outside (0, 1]");
    }
  }
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 1; j < sorted.size(); ++j) {
    if (sorted[j] - sorted[j - 1] < 1e-12) fail(ErrorCode::NodeCollision, "MDBD: repeated parameter p");
  }
  const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  if (total > 1.0 + 1e-12) {
    fail(ErrorCode::WeightOutOfRange, "MDBD: weights sum to " + fmt(total) + " > 1");
  }
}

double log_binomial(std::size_t n, std::size_t k) {
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double bernstein(std::size_t n, std::size_t i, double x) {
  if (i > n) fail(ErrorCode::IndexOutOfRange, "bernstein: i > N");
  check_unit(x, "bernstein");
  if (x == 0.0) return i == 0 ? 1.0 : 0.0;
  if (x == 1.0) return i == n ? 1.0 : 0.0;
  const double log_value = log_binomial(n, i) + static_cast<double>(i) * std::log(x) +
                           static_cast<double>(n - i) * std::log1p(-x);
  return std::exp(log_value);
}

double bernstein_derivative(std::size_t n, std::size_t i, std::size_t order, double x) {
  if (i > n || order > n) fail(ErrorCode::IndexOutOfRange, "bernstein_derivative: index out of range");
  check_unit(x, "bernstein_derivative");
  if (order == 0) return bernstein(n, i, x);
  const double log_falling =
      std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(n - order) + 1.0);
  const std::size_t lo = i + order > n ? i + order - n : 0;
  const std::size_t hi = std::min(i, order);
  double sum = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double magnitude = std::exp(log_falling + log_binomial(order, k)) * bernstein(n - order, i - k, x);
    sum += ((k + order) % 2 == 0) ? magnitude : -magnitude;
  }
  return sum;
}

Vector induce_gamma(const MDBD& mix) {
  mix.validate();
  Vector gamma(mix.n + 1, 0.0);
  for (std::size_t i = 0; i <= mix.n; ++i) {
    for (std::size_t j = 0; j < mix.t(); ++j) gamma[i] += mix.alpha[j] * bernstein(mix.n, i, mix.p[j]);
  }
  return gamma;
}

SmoothPdf uniform_pdf() {
  SmoothPdf w;
  w.name = "uniform";
  w.eval = [](unsigned order, double) { return order == 0 ? 1.0 : 0.0; };
  w.phi = 1.0;
  w.c = 1.0;
  return w;
}

SmoothPdf exponential_pdf(double k) {
  require(std::isfinite(k) && k >= 1.0, ErrorCode::InvalidParameter, "exponential pdf needs k >= 1");
  const double scale = k / (1.0 - std::exp(-k));
  SmoothPdf w;
  w.name = "exp:" + fmt(k);
  w.eval = [k, scale](unsigned order, double x) { return std::pow(-k, static_cast<double>(order)) * scale * std::exp(-k * x); };
  w.phi = scale;
  w.c = scale;
  return w;
}

SmoothPdf canonical_pdf(std::string_view name) {
  if (name == "uniform") return uniform_pdf();
  for (std::string_view prefix : {std::string_view("exp:"), std::string_view("exponential:")}) {
    if (name.substr(0, prefix.size()) == prefix) {
      const std::string rest(name.substr(prefix.size()));
      std::size_t used = 0;
      double k = 0.0;
      try {
        k = std::stod(rest, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == rest.size() && used > 0, ErrorCode::InvalidParameter, "bad exponential rate in '" + std::string(name) + "'");
      return exponential_pdf(k);
    }
  }
  fail(ErrorCode::InvalidParameter, "unknown pdf '" + std::string(name) + "'");
}

HaldTerms hald_terms(const SmoothPdf& w, double x) {
  check_unit(x, "hald_terms");
  const double w0 = w.derivative(0, x);
  if (!(w0 > 1e-14)) fail(ErrorCode::DivisionByZero, "hald_terms: w(" + fmt(x) + ") vanishes");
  const double w1 = w.derivative(1, x);
  const double w2 = w.derivative(2, x);
  const double w3 = w.derivative(3, x);
  const double w4 = w.derivative(4, x);
  const double u = x * (1.0 - x);
  const double v = 1.0 - 2.0 * x;
  HaldTerms h;
  h.b1 = (-w0 + v * w1 + 0.5 * u * w2) / w0;
  h.b2 = (w0 - 3.0 * v * w1 + (1.0 - 6.0 * x + 6.0 * x * x) * w2 + (5.0 / 6.0) * u * v * w3 + 0.125 * u * u * w4) / w0;
  return h;
}

double trapezoid_error_bound(double second_derivative_abs_integral, std::size_t t) {
  require(second_derivative_abs_integral >= 0.0, ErrorCode::InvalidParameter,
          "trapezoid_error_bound: integral must be nonnegative");
  require(t > 0, ErrorCode::InvalidParameter, "trapezoid_error_bound: T must be positive");
  const auto td = static_cast<double>(t);
  return second_derivative_abs_integral / (8.0 * td * td);
}

PdfFit app_dscr_pdf(const SmoothPdf& w, std::size_t n, double eps_i) {
  require(n >= 1, ErrorCode::InvalidParameter, "app_dscr_pdf: N must be positive");
  require(eps_i > 0.0 && !std::isnan(eps_i), ErrorCode::InvalidParameter, "app_dscr_pdf: eps_i must be positive");
  const double phi = std::max(w.phi, 1.0);
  const double t_real = std::ceil(static_cast<double>(n) * std::sqrt(phi / eps_i));
  if (!(t_real >= 1.0)) fail(ErrorCode::InvalidParameter, "app_dscr_pdf: eps_i leaves T < 1");
  if (t_real > 1e7) fail(ErrorCode::InvalidParameter, "app_dscr_pdf: T = " + fmt(t_real) + " is too large");
  const auto t = static_cast<std::size_t>(t_real);
  const auto nd = static_cast<double>(n);
  const double t1 = static_cast<double>(t + 1);

  PdfFit fit;
  for (std::size_t i = 0; i <= n; ++i) fit.s_grid += w(static_cast<double>(i) / nd);
  require(fit.s_grid > 0.0, ErrorCode::InvalidParameter, "app_dscr_pdf: pdf vanishes on the grid");

  fit.mix.n = n;
  for (std::size_t j = 1; j <= t; ++j) {
    const double pj = static_cast<double>(j) / t1;
    const double wj = w(pj);
    fit.s_nodes += wj;
    const double aj = wj * nd / (t1 * fit.s_grid);
    if (!(aj > 0.0 && aj < 1.0)) {
      ++fit.dropped;
      fit.warnings.push_back("component p=" + fmt(pj) + " dropped: alpha=" + fmt(aj) + " outside (0, 1)");
      continue;
    }
    fit.mix.p.push_back(pj);
    fit.mix.alpha.push_back(aj);
  }
  require(!fit.mix.p.empty(), ErrorCode::WeightOutOfRange, "app_dscr_pdf: every component was dropped");
  fit.delta_w = 1.0 - (fit.s_nodes / t1) / (fit.s_grid / nd);
  return fit;
}

std::vector<ResidualRow> residual_table(const SmoothPdf& w, const PdfFit& fit) {
  const std::size_t n = fit.mix.n;
  std::vector<ResidualRow> rows;
  if (n < 6) return rows;
  const Vector gamma = induce_gamma(fit.mix);
  const double keep = 1.0 - fit.mix.delta();
  const auto nd = static_cast<double>(n);
  for (std::size_t i = 3; i + 3 <= n; ++i) {
    const double x = static_cast<double>(i) / nd;
    ResidualRow row;
    row.i = i;
    row.normalized_gamma = gamma[i] / keep;
    row.target = w(x) / fit.s_grid;
    const HaldTerms h = hald_terms(w, x);
    row.eta_hat = h.b1 / nd + h.b2 / (nd * nd);
    row.deviation = std::abs(row.normalized_gamma - (1.0 + 2.0 * row.eta_hat) * row.target);
    rows.push_back(row);
  }
  return rows;
}

bool PdfConditionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.pass; });
}

PdfConditionReport check_pdf_conditions(const SmoothPdf& w, std::size_t n0, double mu, double omega) {
  require(n0 >= 1, ErrorCode::InvalidParameter, "check_pdf_conditions: N0 must be positive");
  const std::size_t points = 10 * n0 + 1;
  const double n0d = static_cast<double>(n0);
  const double phi = w.phi;
  PdfConditionReport report;
  auto add = [&](std::string id, std::string text, double measured, double bound, bool pass) {
    report.checks.push_back({std::move(id), std::move(text), measured, bound, pass});
  };

  const double w2 = max_on_grid(points, [&](double x) { return w.derivative(2, x); });
  const double w1 = max_on_grid(points, [&](double x) { return w.derivative(1, x); });
  const double w0 = max_on_grid(points, [&](double x) { return w.derivative(0, x); });
  add("1", "max|w''| <= 2 phi N0^2", w2, 2.0 * phi * n0d * n0d, w2 <= 2.0 * phi * n0d * n0d);
  add("2", "max|w'| <= phi N0 / 2", w1, 0.5 * phi * n0d, w1 <= 0.5 * phi * n0d);
  add("3", "max|w| <= phi", w0, phi, w0 <= phi * (1.0 + 1e-12));

  double b1 = 0.0;
  double b2 = 0.0;
  try {
    b2 = max_on_grid(points, [&](double x) { return hald_terms(w, x).b2; });
    b1 = max_on_grid(points, [&](double x) { return hald_terms(w, x).b1; });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DivisionByZero) throw;
    b1 = b2 = std::numeric_limits<double>::infinity();
  }
  add("4", "max|b2| <= mu N0^2 / 2", b2, 0.5 * mu * n0d * n0d, b2 <= 0.5 * mu * n0d * n0d);
  add("5", "max|b1| <= mu N0 / 2", b1, 0.5 * mu * n0d, b1 <= 0.5 * mu * n0d);

  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -std::numeric_limits<double>::infinity();
  double curvature = 0.0;
  const double h = 1.0 / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) * h;
    const double f = w.f(x);
    f_min = std::min(f_min, f);
    f_max = std::max(f_max, f);
    const double weight = (k == 0 || k + 1 == points) ? 0.5 : 1.0;
    curvature += weight * h * std::abs(w.derivative(2, x) / w.c);
  }
  add("a", "0 <= f <= 1", f_max, 1.0, f_min >= 0.0 && f_max <= 1.0 + 1e-12);
  const double ends = 0.5 * (w.f(0.0) + w.f(1.0));
  add("b", "(f(0) + f(1)) / 2 >= omega", ends, omega, ends >= omega);
  add("c", "1 <= C <= N0", w.c, n0d, w.c >= 1.0 - 1e-12 && w.c <= n0d);
  add("d", "integral |f''| <= N0", curvature, n0d, curvature <= n0d);
  return report;
}

}  // namespace polysparse
