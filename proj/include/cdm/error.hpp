#pragma once

#include <stdexcept>
#include <string>

namespace cdm {

// Failure categories surfaced across the library. Conditions that are
// recoverable by design (degenerate scatter, ambiguous rotations) are
// reported through sentinel values or flags instead of exceptions.
enum class ErrorCode {
  InvalidInput = 1,
  DegenerateDegree,
  NumericalFailure,
  SpectralUnderflow,
  DegeneratePhase,
  ZeroVariance,
  IoFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace cdm
