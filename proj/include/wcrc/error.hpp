#pragma once

#include <stdexcept>
#include <string>

namespace wcrc {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateTarget,
  kIndexOutOfRange,
  kDuplicateIndex,
  kDimensionMismatch,
  kMalformedSchema,
  kProbabilitySum,
  kEmptyDistribution,
  kIoFailure,
  kThresholdExceeded,
  kSolverNonConvergence,
  kFactorizationFailure,
  kIllConditioned,
  kMissingObservation,
  kInvariantViolation,
};

const char* to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception; `code()` lets
/// callers (and the CLI exit status) distinguish the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Solver failure carrying the last certified residual.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, double residual)
      : Error(ErrorCode::kSolverNonConvergence,
              message + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace wcrc
