#include "corrdyn/error.hpp"

namespace corrdyn {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Indeterminate: return "Indeterminate";
    case ErrorCode::DegreeTooLow: return "DegreeTooLow";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::InexactDivision: return "InexactDivision";
    case ErrorCode::FiberDegenerate: return "FiberDegenerate";
    case ErrorCode::DegreeBoundExceeded: return "DegreeBoundExceeded";
    case ErrorCode::InterpolationIllConditioned: return "InterpolationIllConditioned";
    case ErrorCode::DiscriminantDegenerate: return "DiscriminantDegenerate";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::NotAnInvolution: return "NotAnInvolution";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ExceptionalStart: return "ExceptionalStart";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace corrdyn
