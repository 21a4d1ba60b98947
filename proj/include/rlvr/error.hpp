#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlvr {

enum class ErrorCode {
  UnbalancedBraces,
  TypeMismatch,
  NonFiniteInput,
  InvalidConfig,
  SchemaViolation,
  EmptyDataset,
  CardinalityMismatch,
  IoFailure,
  TooFewComponents,
  InsufficientReviewers,
  BackendUnreachable,
  BindFailure,
};

std::string_view to_string(ErrorCode code);

/// Every failure the library reports carries one of the codes above so
/// callers (and the service's error responses) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rlvr
