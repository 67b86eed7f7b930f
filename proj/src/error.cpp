#include "fsfmb/error.hpp"

namespace fsfmb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::UnknownBaseFactor: return "UnknownBaseFactor";
    case ErrorCode::Misalignment: return "Misalignment";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::BudgetExceedsRank: return "BudgetExceedsRank";
    case ErrorCode::EquivalenceViolation: return "EquivalenceViolation";
    case ErrorCode::DegenerateResidual: return "DegenerateResidual";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::FoldTooSmall: return "FoldTooSmall";
    case ErrorCode::SplitTooShort: return "SplitTooShort";
    case ErrorCode::EmptyRegime: return "EmptyRegime";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

bool is_io_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::EmptyIntersection:
    case ErrorCode::NonMonotoneDates:
    case ErrorCode::Io:
    case ErrorCode::Config:
      return true;
    default:
      return false;
  }
}

}  // namespace fsfmb
