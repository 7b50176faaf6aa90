#include "ricciwarp/error.hpp"

namespace ricciwarp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonNegativeDenominator: return "NonNegativeDenominator";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::ImmediateEventAtStart: return "ImmediateEventAtStart";
    case ErrorCode::NonPositiveA: return "NonPositiveA";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NonuniformGrid: return "NonuniformGrid";
    case ErrorCode::GridsNotNested: return "GridsNotNested";
    case ErrorCode::RadicandNegativeAtStart: return "RadicandNegativeAtStart";
    case ErrorCode::NoFeasibleUpperBound: return "NoFeasibleUpperBound";
    case ErrorCode::RadicandVanishesInInterior: return "RadicandVanishesInInterior";
    case ErrorCode::InfeasibleInitialH: return "InfeasibleInitialH";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::StallWithoutBlowup: return "StallWithoutBlowup";
    case ErrorCode::NoCollapseSignature: return "NoCollapseSignature";
    case ErrorCode::FitResidualTooLarge: return "FitResidualTooLarge";
    case ErrorCode::TailTooShort: return "TailTooShort";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace ricciwarp
