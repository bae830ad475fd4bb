#pragma once

#include <cstddef>
#include <cstdint>

#include "polysparse/base_sparsify.hpp"
#include "polysparse/matrix_core.hpp"
#include "polysparse/mdbd.hpp"

namespace polysparse {

bool is_power_of_two(std::size_t n) noexcept;
/// log2 of a power of two; throws InvalidParameter otherwise.
unsigned exact_log2(std::size_t n);

/// Split of eps_total into the initial pass, the squarings and the final
/// refinement passes. The budget is shrunk until the composed factors fit.
struct ErrorSchedule {
  double eps_total = 0.0;
  double eps_init = 0.0;
  double eps_step = 0.0;
  double eps_final = 0.0;
  unsigned squarings = 0;
  unsigned final_passes = 1;

  static ErrorSchedule make(double eps, std::size_t n, unsigned final_passes = 1);
  /// Composed upper and lower multiplicative factors.
  double upper() const;
  double lower() const;
};

enum class InitBranch { Trivial, Spsd, General };
const char* to_string(InitBranch branch);

/// mklc at eps/4, then mps at eps/4 on the result. Requires SPSD M.
TMatrix fss(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts = {});

/// D - M_next ~eps_step D - M_cur D^-1 M_cur.
SparseSym sqr_ss(const PosDiag& d, const SparseSym& m_cur, double eps_step, std::uint64_t seed,
                 const SparsifyOptions& opts = {});

/// log2(n) - 1 squarings of M_2 followed by one refining mklc pass at eps.
SparseSym ind_ss(const PosDiag& d, const SparseSym& m2, std::size_t n, double eps, double eps_step,
                 std::uint64_t seed, const SparsifyOptions& opts = {});

struct PowerResult {
  TMatrix sparsifier;
  InitBranch branch = InitBranch::Trivial;
};

/// D - M_hat ~eps D - D (D^-1 M)^n.
PowerResult pwr_ss(const TMatrix& b, std::size_t n, double eps, std::uint64_t seed, const SparsifyOptions& opts = {});

/// D - M_hat ~eps D - D W_p^n with W_p = (1 - p) I + p D^-1 M.
PowerResult lazy_ss(const TMatrix& b, std::size_t n, double p, double eps, std::uint64_t seed,
                    const SparsifyOptions& opts = {});

struct InitResult {
  SparseSym m1;
  SparseSym m2;
  InitBranch branch = InitBranch::Trivial;
};

InitResult init_ss(const TMatrix& b, double eps, std::uint64_t seed, const SparsifyOptions& opts = {});

struct MixtureOptions {
  SparsifyOptions sparsify;
  /// Worker cap; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

struct MixtureResult {
  TMatrix sparsifier;
  double delta = 0.0;
  InitBranch branch = InitBranch::Trivial;
  ErrorSchedule schedule;
};

/// D - M_hat ~eps D - D sum_i (gamma_i / (1 - delta)) (D^-1 M)^i for the
/// coefficients gamma induced by `mix`.
MixtureResult ss_mdbd(const TMatrix& b, const MDBD& mix, double eps, std::uint64_t seed,
                      const MixtureOptions& opts = {});

}  // namespace polysparse
