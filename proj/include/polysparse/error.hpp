#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polysparse {

enum class ErrorCode {
  DimensionMismatch,
  DominanceViolation,
  SizeLimitExceeded,
  KernelMismatch,
  NotPSD,
  InvalidParameter,
  NegativeDiagonalResidue,
  DeltaOverflow,
  IndexOutOfRange,
  WeightOutOfRange,
  DivisionByZero,
  IllConditioned,
  NodeCollision,
  VertexNotInSet,
  EmptySubset,
  KappaTooSmall,
  NoConvergence,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

// Largest matrix dimension for which dense O(n^3) checks are allowed.
// Defaults to 2000; POLYSPARSE_DENSE_LIMIT overrides it.
std::size_t dense_limit();
void set_dense_limit(std::size_t limit);
void check_dense_size(std::size_t n, std::string_view what);

}  // namespace polysparse
