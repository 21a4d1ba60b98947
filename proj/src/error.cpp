#include "rlvr/error.hpp"

namespace rlvr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnbalancedBraces: return "UnbalancedBraces";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::CardinalityMismatch: return "CardinalityMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::TooFewComponents: return "TooFewComponents";
    case ErrorCode::InsufficientReviewers: return "InsufficientReviewers";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::BindFailure: return "BindFailure";
  }
  return "Unknown";
}

}  // namespace rlvr
