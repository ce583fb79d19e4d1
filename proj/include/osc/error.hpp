#pragma once

#include <stdexcept>
#include <string>

namespace osc {

enum class ErrorCode {
  PrecisionExhausted,      // DecimalLiteral asked for more digits than it carries
  PrecisionCapExceeded,    // escalation hit the configured bit cap
  AmbiguousAtHalfInteger,  // enclosure contains a point of Z + 1/2
  AmbiguousSign,           // enclosure contains 0 and the value is not exact
  RuleFailure,             // RuleCF generator rejected its parameters
  Overflow,                // big-integer budget exceeded
  IndexOutOfRange,
  InvalidArgument,
  AmbiguousDigit,
  BoundaryCase,
  NoWitnessAtScale,
  DepthExhausted,
  HypothesisUnmet,
  Parse,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace osc
