#include "osc/error.hpp"

namespace osc {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PrecisionExhausted: return "precision-exhausted";
    case ErrorCode::PrecisionCapExceeded: return "precision-cap-exceeded";
    case ErrorCode::AmbiguousAtHalfInteger: return "ambiguous-at-half-integer";
    case ErrorCode::AmbiguousSign: return "ambiguous-sign";
    case ErrorCode::RuleFailure: return "rule-failure";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::IndexOutOfRange: return "index-out-of-range";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::AmbiguousDigit: return "ambiguous-digit";
    case ErrorCode::BoundaryCase: return "boundary-case";
    case ErrorCode::NoWitnessAtScale: return "no-witness-at-scale";
    case ErrorCode::DepthExhausted: return "depth-exhausted";
    case ErrorCode::HypothesisUnmet: return "hypothesis-unmet";
    case ErrorCode::Parse: return "parse-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace osc
