#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace storval {

enum class ErrorKind {
  // input / data
  DegenerateInput,
  LengthMismatch,
  StageOutOfRange,
  InvalidOrder,
  InvalidArgument,
  DegenerateSample,
  DataError,
  ConfigError,
  // model
  InfeasibleInput,
  ConditionViolated,
  NotTrained,
  BracketInvalid,
  // numerics
  NumericalUnderflow,
  Infeasible,
  Unbounded,
  MaxIterations,
  MaxEvaluations,
  OverflowGuard,
  DomainError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Broad category used by the CLI to pick an exit code.
enum class ErrorCategory { Config, Data, Numerical };

ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace storval
