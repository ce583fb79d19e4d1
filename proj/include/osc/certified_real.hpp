#pragma once

#include <gmpxx.h>

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace osc {

// A positive real exponent, kept as an exact rational so that integral
// exponents can take exact paths and fractional ones get directed rounding.
class Exponent {
 public:
  Exponent() : value_(1) {}
  explicit Exponent(const mpq_class& value);
  static Exponent parse(std::string_view text);  // "2", "0.5", "3/2"

  const mpq_class& value() const { return value_; }
  bool is_integer() const { return value_.get_den() == 1; }
  unsigned long integer() const;  // only when is_integer()
  mpz_class ceil() const;
  double to_double() const { return value_.get_d(); }
  std::string str() const;

  friend bool operator==(const Exponent& a, const Exponent& b) { return a.value_ == b.value_; }

 private:
  mpq_class value_;
};

// Ball [center - radius, center + radius] with exact rational endpoints.
// Every operation returns an enclosure of the exact result.
class CertifiedReal {
 public:
  CertifiedReal() = default;
  CertifiedReal(const mpq_class& exact) : center_(exact) {}  // NOLINT(implicit)
  CertifiedReal(const mpz_class& exact) : center_(exact) {}  // NOLINT(implicit)
  CertifiedReal(long exact) : center_(exact) {}              // NOLINT(implicit)
  CertifiedReal(mpq_class center, mpq_class radius);
  static CertifiedReal from_bounds(const mpq_class& lo, const mpq_class& hi);

  const mpq_class& center() const { return center_; }
  const mpq_class& radius() const { return radius_; }
  mpq_class lower() const { return center_ - radius_; }
  mpq_class upper() const { return center_ + radius_; }
  bool is_exact() const { return sgn(radius_) == 0; }
  bool contains(const mpq_class& x) const;
  bool contains_zero() const { return contains(mpq_class(0)); }

  // Certified sign; empty when the ball straddles 0 and is not exactly 0.
  std::optional<int> sign() const;

  // Center snapped to the 2^-bits grid, radius widened to keep the enclosure.
  CertifiedReal rounded(long bits) const;

  CertifiedReal abs() const;
  CertifiedReal operator-() const { return CertifiedReal(-center_, radius_); }
  CertifiedReal& operator+=(const CertifiedReal& o);
  CertifiedReal& operator-=(const CertifiedReal& o);
  CertifiedReal& operator*=(const CertifiedReal& o);
  CertifiedReal divided(const mpq_class& exact_nonzero) const;
  // Reciprocal; the ball must exclude 0.
  CertifiedReal inverse() const;

  // this^e for a ball inside [0, inf). Integral e is exact before rounding.
  CertifiedReal pow(const Exponent& e, long bits) const;

  double approx() const { return center_.get_d(); }
  std::string decimal(int digits) const;  // center, fixed point
  std::string scientific(int significant) const;  // center, round to nearest
  std::string radius_string() const;      // radius rounded up, scientific

 private:
  mpq_class center_{0};
  mpq_class radius_{0};
};

inline CertifiedReal operator+(CertifiedReal a, const CertifiedReal& b) { return a += b; }
inline CertifiedReal operator-(CertifiedReal a, const CertifiedReal& b) { return a -= b; }
inline CertifiedReal operator*(CertifiedReal a, const CertifiedReal& b) { return a *= b; }

// a < b for every pair of points in the two balls.
inline bool certainly_less(const CertifiedReal& a, const CertifiedReal& b) {
  return a.upper() < b.lower();
}
inline bool overlaps(const CertifiedReal& a, const CertifiedReal& b) {
  return !(a.upper() < b.lower()) && !(b.upper() < a.lower());
}
CertifiedReal hull(const CertifiedReal& a, const CertifiedReal& b);

// 2^-bits as an exact rational.
mpq_class pow2_neg(long bits);
// Exact decimal string to rational ("-1.25" -> -5/4); also accepts "p/q".
mpq_class parse_rational(std::string_view text);
std::string rational_decimal(const mpq_class& x, int digits);

// Signed fractional part <x>_2 in [-1/2, 1/2).
struct SignedFrac {
  CertifiedReal value;
  int sign = 0;
  mpz_class shift;  // x - value == shift
};

// Throws AmbiguousAtHalfInteger when the ball meets Z + 1/2, AmbiguousSign
// when it straddles an integer without being exact.
SignedFrac signed_frac(const CertifiedReal& x);
// ||x||, well defined everywhere.
CertifiedReal dist_nearest_int(const CertifiedReal& x);

// Precision escalation policy: start, double, stop at max_bits.
struct PrecisionPolicy {
  long start_bits = 64;
  long max_bits = 4096;
  static PrecisionPolicy from_env();  // honours OSC_PRECISION_CAP
};

using Evaluator = std::function<CertifiedReal(long bits)>;

// Sign of a single ball; throws AmbiguousSign when it cannot be decided.
int certify_sign(const CertifiedReal& x);
// Re-evaluates at doubling precision until the sign is certified.
int certify_sign(const Evaluator& eval, long max_bits, long start_bits = 64);

}  // namespace osc
