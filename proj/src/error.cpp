#include "lmmss/error.hpp"

namespace lmmss {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::RankDeficientL: return "RankDeficientL";
    case ErrorCode::CompletenessViolation: return "CompletenessViolation";
    case ErrorCode::NonFiniteResidual: return "NonFiniteResidual";
    case ErrorCode::NonFiniteJacobian: return "NonFiniteJacobian";
    case ErrorCode::UnknownProblem: return "UnknownProblem";
    case ErrorCode::StationaryInput: return "StationaryInput";
    case ErrorCode::LinesearchFailure: return "LinesearchFailure";
    case ErrorCode::NotDescent: return "NotDescent";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NotDecreasing: return "NotDecreasing";
    case ErrorCode::NoDistOracle: return "NoDistOracle";
    case ErrorCode::NoStationarySamples: return "NoStationarySamples";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace lmmss
