#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace caphs {

enum class ErrorKind {
  kMalformedInput,
  kValidationError,
  kUnknownElement,
  kPartialPlurality,
  kOracleTooLarge,
  kBudgetExceeded,
  kQuotaInvalid,
  kPreconditionViolated,
  kOracleInconsistent,
  kNoColoringSeparates,
  kNotThreeRegular,
  kTargetExceedsColumnSum,
  kParameterViolation,
  kEnumerationBudgetExceeded,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedInput: return "MalformedInput";
    case ErrorKind::kValidationError: return "ValidationError";
    case ErrorKind::kUnknownElement: return "UnknownElement";
    case ErrorKind::kPartialPlurality: return "PartialPlurality";
    case ErrorKind::kOracleTooLarge: return "OracleTooLarge";
    case ErrorKind::kBudgetExceeded: return "BudgetExceeded";
    case ErrorKind::kQuotaInvalid: return "QuotaInvalid";
    case ErrorKind::kPreconditionViolated: return "PreconditionViolated";
    case ErrorKind::kOracleInconsistent: return "OracleInconsistent";
    case ErrorKind::kNoColoringSeparates: return "NoColoringSeparates";
    case ErrorKind::kNotThreeRegular: return "NotThreeRegular";
    case ErrorKind::kTargetExceedsColumnSum: return "TargetExceedsColumnSum";
    case ErrorKind::kParameterViolation: return "ParameterViolation";
    case ErrorKind::kEnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace caphs
