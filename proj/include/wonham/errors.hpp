#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wonham {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NegativeOffDiagonal,
  RowSumNonZero,
  NotInvariantMeasure,
  ModelIsDetectable,
  PriorNotAbsolutelyContinuous,
  DegenerateFilter,
  AbsoluteContinuityViolated,
  WindowEmpty,
  BudgetExceeded,
  VarianceIndistinguishableFromZero,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace wonham
