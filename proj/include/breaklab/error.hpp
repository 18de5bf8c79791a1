#pragma once

#include <stdexcept>
#include <string>

namespace breaklab {

enum class ErrorKind {
  InvalidArgument,
  NotCircularlyOrdered,
  DuplicatePoint,
  NotABreakPoint,
  IterationBudgetExceeded,
  InfeasibleDescriptor,
  BudgetExceeded,
  BracketNotFound,
  InsufficientRhoPrecision,
  DegenerateGenerator,
  BreakOnBoundary,
  BisectionFailed,
  DegenerateQuadruple,
  BreakInMiddleInterval,
  MultipleBreaks,
  RotationMismatch,
  ScaleTooFine,
  ConstructionOutOfWindow,
  ConfigError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotCircularlyOrdered: return "NotCircularlyOrdered";
    case ErrorKind::DuplicatePoint: return "DuplicatePoint";
    case ErrorKind::NotABreakPoint: return "NotABreakPoint";
    case ErrorKind::IterationBudgetExceeded: return "IterationBudgetExceeded";
    case ErrorKind::InfeasibleDescriptor: return "InfeasibleDescriptor";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::InsufficientRhoPrecision: return "InsufficientRhoPrecision";
    case ErrorKind::DegenerateGenerator: return "DegenerateGenerator";
    case ErrorKind::BreakOnBoundary: return "BreakOnBoundary";
    case ErrorKind::BisectionFailed: return "BisectionFailed";
    case ErrorKind::DegenerateQuadruple: return "DegenerateQuadruple";
    case ErrorKind::BreakInMiddleInterval: return "BreakInMiddleInterval";
    case ErrorKind::MultipleBreaks: return "MultipleBreaks";
    case ErrorKind::RotationMismatch: return "RotationMismatch";
    case ErrorKind::ScaleTooFine: return "ScaleTooFine";
    case ErrorKind::ConstructionOutOfWindow: return "ConstructionOutOfWindow";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Numerical-budget failures map to CLI exit code 2, everything else to 1.
  bool is_budget_failure() const noexcept {
    return kind_ == ErrorKind::BudgetExceeded || kind_ == ErrorKind::IterationBudgetExceeded ||
           kind_ == ErrorKind::BracketNotFound || kind_ == ErrorKind::BisectionFailed ||
           kind_ == ErrorKind::InsufficientRhoPrecision;
  }

 private:
  ErrorKind kind_;
};

}  // namespace breaklab
