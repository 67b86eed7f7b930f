#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsfmb {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteInput,
  SeriesTooShort,
  SingularDesign,
  UnsupportedDegree,
  UnknownBaseFactor,
  Misalignment,
  EmptyCandidates,
  BudgetExceedsRank,
  EquivalenceViolation,
  DegenerateResidual,
  NotSPD,
  FoldTooSmall,
  SplitTooShort,
  EmptyRegime,
  ParseError,
  EmptyIntersection,
  NonMonotoneDates,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

// True for the input/configuration class of failures (CLI exit code 2).
bool is_io_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fsfmb
