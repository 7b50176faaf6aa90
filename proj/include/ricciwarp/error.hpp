#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ricciwarp {

enum class ErrorCode {
  DomainError,
  InvalidArgument,
  NonNegativeDenominator,
  DegenerateDenominator,
  ImmediateEventAtStart,
  NonPositiveA,
  GridTooCoarse,
  NonuniformGrid,
  GridsNotNested,
  RadicandNegativeAtStart,
  NoFeasibleUpperBound,
  RadicandVanishesInInterior,
  InfeasibleInitialH,
  PreconditionViolation,
  NoConvergence,
  StallWithoutBlowup,
  NoCollapseSignature,
  FitResidualTooLarge,
  TailTooShort,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ricciwarp
