#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfsdim {

enum class ErrorCode {
  RatioOutOfRange,
  DuplicateFixedPoint,
  EmptyGroup,
  TooFewGroups,
  ShapeMismatch,
  InvalidProbability,
  EmptyWord,
  DegenerateMeasure,
  BudgetExceeded,
  RunTooLong,
  NonConvergence,
  RootOutsideBracket,
  ConditionsNotMet,
  NoCaseApplies,
  IoError,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::DuplicateFixedPoint: return "DuplicateFixedPoint";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::EmptyWord: return "EmptyWord";
    case ErrorCode::DegenerateMeasure: return "DegenerateMeasure";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::RunTooLong: return "RunTooLong";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::RootOutsideBracket: return "RootOutsideBracket";
    case ErrorCode::ConditionsNotMet: return "ConditionsNotMet";
    case ErrorCode::NoCaseApplies: return "NoCaseApplies";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code; the CLI maps codes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cfsdim
