#include "wonham/errors.hpp"

namespace wonham {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorCode::RowSumNonZero: return "RowSumNonZero";
    case ErrorCode::NotInvariantMeasure: return "NotInvariantMeasure";
    case ErrorCode::ModelIsDetectable: return "ModelIsDetectable";
    case ErrorCode::PriorNotAbsolutelyContinuous: return "PriorNotAbsolutelyContinuous";
    case ErrorCode::DegenerateFilter: return "DegenerateFilter";
    case ErrorCode::AbsoluteContinuityViolated: return "AbsoluteContinuityViolated";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::VarianceIndistinguishableFromZero: return "VarianceIndistinguishableFromZero";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace wonham
