#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corrdyn {

enum class ErrorCode {
  ZeroPolynomial,
  NonConvergence,
  Indeterminate,
  DegreeTooLow,
  DegreeMismatch,
  InexactDivision,
  FiberDegenerate,
  DegreeBoundExceeded,
  InterpolationIllConditioned,
  DiscriminantDegenerate,
  BadParameter,
  NotAnInvolution,
  BranchAmbiguity,
  BudgetExceeded,
  ExceptionalStart,
  MissingLabels,
  DegenerateFit,
  ParseError,
};

std::string_view error_code_name(ErrorCode code);

// Every math failure in the library is reported through this type; the CLI
// maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace corrdyn
