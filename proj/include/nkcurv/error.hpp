#pragma once

#include <stdexcept>
#include <string>

namespace nkcurv {

enum class ErrorCode {
  InvalidDimension,
  DimensionMismatch,
  RankDeficient,
  NotOrthonormal,
  InvalidArgument,
  HypothesisViolation,
  OutOfDomain,
  DerivativeUnavailable,
  Configuration,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid dimension";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::RankDeficient: return "rank deficient";
    case ErrorCode::NotOrthonormal: return "not orthonormal";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::HypothesisViolation: return "hypothesis violation";
    case ErrorCode::OutOfDomain: return "out of domain";
    case ErrorCode::DerivativeUnavailable: return "derivative unavailable";
    case ErrorCode::Configuration: return "configuration error";
  }
  return "unknown error";
}

/// Every failure raised by the toolkit carries a code so callers can
/// distinguish precondition classes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nkcurv
