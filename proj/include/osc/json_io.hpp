#pragma once

#include <gmpxx.h>

#include <json.hpp>
#include <optional>

#include "osc/certified_real.hpp"

namespace osc {

using Json = nlohmann::ordered_json;

inline constexpr int kJsonDigits = 20;
inline constexpr const char* kSchemaVersion = "osc/1";

// {"value": <scientific center>, "radius": <upper bound>}; null when absent.
inline Json ball_json(const CertifiedReal& x, int digits = kJsonDigits) {
  Json j;
  j["value"] = x.scientific(digits);
  j["radius"] = x.radius_string();
  return j;
}
inline Json ball_json(const std::optional<CertifiedReal>& x, int digits = kJsonDigits) {
  return x ? ball_json(*x, digits) : Json(nullptr);
}
// Integers stay numbers while they fit, strings beyond.
inline Json int_json(const mpz_class& v) {
  if (v.fits_slong_p()) return v.get_si();
  return v.get_str();
}

}  // namespace osc
