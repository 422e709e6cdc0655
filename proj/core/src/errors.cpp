#include "storval/errors.hpp"

namespace storval {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::StageOutOfRange: return "StageOutOfRange";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::DataError: return "DataError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InfeasibleInput: return "InfeasibleInput";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::NotTrained: return "NotTrained";
    case ErrorKind::BracketInvalid: return "BracketInvalid";
    case ErrorKind::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::MaxEvaluations: return "MaxEvaluations";
    case ErrorKind::OverflowGuard: return "OverflowGuard";
    case ErrorKind::DomainError: return "DomainError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidOrder:
    case ErrorKind::BracketInvalid:
    case ErrorKind::ConditionViolated:
      return ErrorCategory::Config;
    case ErrorKind::DegenerateInput:
    case ErrorKind::LengthMismatch:
    case ErrorKind::StageOutOfRange:
    case ErrorKind::DegenerateSample:
    case ErrorKind::DataError:
    case ErrorKind::InfeasibleInput:
    case ErrorKind::NotTrained:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numerical;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace storval
