#include "polysparse/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace polysparse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DominanceViolation: return "DominanceViolation";
    case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
    case ErrorCode::KernelMismatch: return "KernelMismatch";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NegativeDiagonalResidue: return "NegativeDiagonalResidue";
    case ErrorCode::DeltaOverflow: return "DeltaOverflow";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NodeCollision: return "NodeCollision";
    case ErrorCode::VertexNotInSet: return "VertexNotInSet";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::KappaTooSmall: return "KappaTooSmall";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

namespace {

std::size_t initial_dense_limit() {
  if (const char* env = std::getenv("POLYSPARSE_DENSE_LIMIT")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 2000;
}

std::atomic<std::size_t>& limit_storage() {
  static std::atomic<std::size_t> limit{initial_dense_limit()};
  return limit;
}

}  // namespace

std::size_t dense_limit() { return limit_storage().load(); }

void set_dense_limit(std::size_t limit) { limit_storage().store(limit); }

void check_dense_size(std::size_t n, std::string_view what) {
  if (n > dense_limit()) {
    fail(ErrorCode::SizeLimitExceeded,
         std::string(what) + ": dimension " + std::to_string(n) + " exceeds dense limit " +
             std::to_string(dense_limit()));
  }
}

}  // namespace polysparse
