#include "polysparse/poly_sparsify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace polysparse {

namespace {

void check_eps(double eps, const char* where) {
  if (!(eps > 0.0 && eps < 1.0)) {
    fail(ErrorCode::InvalidParameter, std::string(where) + ": eps must lie in (0, 1), got " + std::to_string(eps));
  }
}

SparseSym scaled_diagonal(const PosDiag& d, double factor) {
  Vector values(d.values().begin(), d.values().end());
  for (double& v : values) v *= factor;
  return SparseSym::diagonal(values);
}

PowerResult power_impl(const TMatrix& b, std::size_t n, double eps, std::uint64_t seed,
                       const SparsifyOptions& opts, std::optional<bool> spsd_hint) {
  check_eps(eps, "pwr_ss");
  exact_log2(n);
  if (n == 1) return {mklc(b, eps, seed, opts), InitBranch::Trivial};
  if (b.m().stored_entries() == 0) return {b, InitBranch::Trivial};

  const ErrorSchedule schedule = ErrorSchedule::make(eps, n, 1);
  const bool spsd = spsd_hint ? *spsd_hint : is_spsd(b.m(), b.d());
  const TMatrix m2 = spsd ? fss(b, schedule.eps_init, derive_seed(seed, 1), opts)
                          : mps(b, schedule.eps_init, derive_seed(seed, 1), opts);
  SparseSym m_n = ind_ss(b.d(), m2.m(), n, schedule.eps_final, schedule.eps_step, derive_seed(seed, 2), opts);
  return {build_tmatrix(b.d(), std::move(m_n)), spsd ? InitBranch::Spsd : InitBranch::General};
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

unsigned exact_log2(std::size_t n) {
  if (!is_power_of_two(n)) fail(ErrorCode::InvalidParameter, "N = " + std::to_string(n) + " is not a power of two");
  unsigned k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

ErrorSchedule ErrorSchedule::make(double eps, std::size_t n, unsigned final_passes) {
  check_eps(eps, "ErrorSchedule");
  const unsigned levels = std::max(1U, exact_log2(n));
  auto split = [&](double b) {
    ErrorSchedule s;
    s.eps_total = eps;
    s.eps_init = b / 3.0;
    s.eps_step = b / (3.0 * levels);
    s.eps_final = b / 3.0;
    s.squarings = levels - 1;
    s.final_passes = final_passes;
    return s;
  };
  auto fits = [&](double b) {
    const ErrorSchedule s = split(b);
    return s.upper() <= 1.0 + eps && s.lower() >= 1.0 - eps;
  };
  // Largest budget b <= eps whose thirds split composes inside (1 +- eps).
  double lo = 0.0;
  double hi = eps;
  if (fits(hi)) {
    lo = hi;
  } else {
    for (int iter = 0; iter < 100; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (fits(mid) ? lo : hi) = mid;
    }
  }
  if (!(lo > 0.0)) fail(ErrorCode::InvalidParameter, "ErrorSchedule: no admissible split for eps " + std::to_string(eps));
  return split(lo);
}

double ErrorSchedule::upper() const {
  return (1.0 + eps_init) * std::pow(1.0 + eps_step, squarings) * std::pow(1.0 + eps_final, final_passes);
}

double ErrorSchedule::lower() const {
  return (1.0 - eps_init) * std::pow(1.0 - eps_step, squarings) * std::pow(1.0 - eps_final, final_passes);
}

const char* to_string(InitBranch branch) {
  switch (branch) {
    case InitBranch::Trivial: return "trivial";
    case InitBranch::Spsd: return "spsd";
    case InitBranch::General: return "general";
  }
  return "unknown";
}

TMatrix fss(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts) {
  check_eps(eps, "fss");
  const TMatrix first = mklc(b, eps / 4.0, derive_seed(seed, 1), opts);
  return mps(first, eps / 4.0, derive_seed(seed, 2), opts);
}

SparseSym sqr_ss(const PosDiag& d, const SparseSym& m_cur, double eps_step, std::uint64_t seed,
                 const SparsifyOptions& opts) {
  check_eps(eps_step, "sqr_ss");
  return mps(build_tmatrix(d, m_cur), eps_step, seed, opts).m();
}

SparseSym ind_ss(const PosDiag& d, const SparseSym& m2, std::size_t n, double eps, double eps_step,
                 std::uint64_t seed, const SparsifyOptions& opts) {
  check_eps(eps, "ind_ss");
  check_eps(eps_step, "ind_ss");
  const unsigned k = exact_log2(n);
  require(k >= 1, ErrorCode::InvalidParameter, "ind_ss: N must be at least 2");
  SparseSym current = m2;
  for (unsigned step = 1; step < k; ++step) current = sqr_ss(d, current, eps_step, derive_seed(seed, step), opts);
  return mklc(build_tmatrix(d, std::move(current)), eps, derive_seed(seed, 0), opts).m();
}

PowerResult pwr_ss(const TMatrix& b, std::size_t n, double eps, std::uint64_t seed, const SparsifyOptions& opts) {
  return power_impl(b, n, eps, seed, opts, std::nullopt);
}

PowerResult lazy_ss(const TMatrix& b, std::size_t n, double p, double eps, std::uint64_t seed,
                    const SparsifyOptions& opts) {
  require(p > 0.0 && p < 1.0, ErrorCode::InvalidParameter, "lazy_ss: p must lie in (0, 1)");
  // D W_p = (1 - p) D + p M; for p <= 1/2 it is SPSD without checking.
  const TMatrix lazy = build_tmatrix(b.d(), scaled_diagonal(b.d(), 1.0 - p) + b.m().scaled(p));
  std::optional<bool> hint;
  if (p <= 0.5) hint = true;
  return power_impl(lazy, n, eps, seed, opts, hint);
}

InitResult init_ss(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts) {
  check_eps(eps, "init_ss");
  InitResult out;
  out.m1 = mklc(b, eps, derive_seed(seed, 1), opts).m();
  if (b.m().stored_entries() == 0) {
    out.m2 = SparseSym(b.dim());
    return out;
  }
  const bool spsd = is_spsd(b.m(), b.d());
  out.branch = spsd ? InitBranch::Spsd : InitBranch::General;
  out.m2 = (spsd ? fss(b, eps, derive_seed(seed, 2), opts) : mps(b, eps, derive_seed(seed, 2), opts)).m();
  return out;
}

MixtureResult ss_mdbd(const TMatrix& b, const MDBD& mix, double eps, std::uint64_t seed, const MixtureOptions& opts) {
  mix.validate();
  check_eps(eps, "ss_mdbd");
  const double delta = mix.delta();
  if (delta >= 1.0 - 1e-9) fail(ErrorCode::DeltaOverflow, "ss_mdbd: mixture weights vanish");
  const std::size_t n = mix.n;
  exact_log2(n);

  const ErrorSchedule schedule = ErrorSchedule::make(eps, n, 2);
  const InitResult init = init_ss(b, schedule.eps_init, derive_seed(seed, 0), opts.sparsify);
  const PosDiag& d = b.d();
  const std::size_t t = mix.t();

  std::vector<SparseSym> parts(t);
  std::vector<std::exception_ptr> errors(t);
  auto work = [&](std::size_t j) {
    const double p = mix.p[j];
    if (n == 1) {
      parts[j] = scaled_diagonal(d, 1.0 - p) + init.m1.scaled(p);
      return;
    }
    const SparseSym mp2 =
        scaled_diagonal(d, (1.0 - p) * (1.0 - p)) + init.m1.scaled(2.0 * p * (1.0 - p)) + init.m2.scaled(p * p);
    parts[j] = ind_ss(d, mp2, n, schedule.eps_final, schedule.eps_step, derive_seed(seed, j + 1), opts.sparsify);
  };

  unsigned workers = opts.threads != 0 ? opts.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, t));
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t j = next++; j < t; j = next++) {
      try {
        work(j);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Ordered reduction keeps the result independent of scheduling.
  SparseSym accumulated(b.dim());
  for (std::size_t j = 0; j < t; ++j) accumulated = accumulated + parts[j].scaled(mix.alpha[j]);
  const TMatrix combined = build_tmatrix(d, accumulated.scaled(1.0 / (1.0 - delta)));

  MixtureResult out;
  out.sparsifier = mklc(combined, schedule.eps_final, derive_seed(seed, t + 1), opts.sparsify);
  out.delta = delta;
  out.branch = init.branch;
  out.schedule = schedule;
  return out;
}

}  // namespace polysparse
