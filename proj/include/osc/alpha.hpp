#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "osc/certified_real.hpp"

namespace osc {

// (a + b*sqrt(d)) / c, d > 0 not a perfect square, b != 0, c != 0.
struct QuadraticSurd {
  mpz_class a, b, d, c;
};

// [preperiod; (period)] -- preperiod holds a_0 first.
struct PeriodicCF {
  std::vector<mpz_class> preperiod;
  std::vector<mpz_class> period;
};

// Named generator producing a_n on demand: liouville, asym, linear, e.
struct RuleCF {
  std::string name;
  std::vector<std::string> params;
};

// `digits` carries `count` guaranteed fractional digits.
struct DecimalLiteral {
  std::string digits;
  int count = 0;
};

using AlphaSpec = std::variant<QuadraticSurd, PeriodicCF, RuleCF, DecimalLiteral>;

// Grammar: surd:a,b,d,c | cf:[a0;a1,...(p1,...,pk)] | rule:<name>:<params> | dec:<digits>@<count>
AlphaSpec parse_alpha_spec(std::string_view text);
std::string format_alpha_spec(const AlphaSpec& spec);

// Throws InvalidArgument when a spec violates its invariants.
void validate(const AlphaSpec& spec);

// Exact sign of A + B*sqrt(d) for non-square d > 0.
int surd_sign(const mpz_class& A, const mpz_class& B, const mpz_class& d);

// Default cap on the bit length of convergent denominators.
inline constexpr std::size_t kDefaultQBitBudget = std::size_t{1} << 24;

// An irrational number as an exactly-queryable object: partial quotients,
// convergents, certified enclosures and exact signs of c0 + c1*alpha.
// Thread-safe; caches grow lazily under a mutex.
class Alpha {
 public:
  explicit Alpha(AlphaSpec spec, std::size_t q_bit_budget = kDefaultQBitBudget);

  const AlphaSpec& spec() const { return spec_; }
  std::string str() const { return format_alpha_spec(spec_); }
  bool is_decimal() const { return std::holds_alternative<DecimalLiteral>(spec_); }
  // Exact quadratic form, known for surds and periodic expansions.
  const std::optional<QuadraticSurd>& surd() const { return surd_; }

  mpz_class quotient(std::size_t n) const;
  // p_n, q_n for n >= 0 (p_{-1} = 1, q_{-1} = 0 internally).
  mpz_class p(std::size_t n) const;
  mpz_class q(std::size_t n) const;
  // Largest n for which quotients are certified (decimal literals only).
  std::optional<std::size_t> certified_depth() const;

  // Enclosure with radius <= 2^-bits.
  CertifiedReal eval(long bits) const;

  // Exact sign of c0 + c1*alpha. Decimal literals decide from their
  // enclosure and throw PrecisionExhausted if it is too wide.
  int sign_of(const mpq_class& c0, const mpq_class& c1) const;
  // Enclosure of c0 + c1*alpha with radius <= 2^-bits.
  CertifiedReal eval_form(const mpq_class& c0, const mpq_class& c1, long bits) const;

 private:
  void extend_to(std::size_t n) const;  // requires mu_ held
  mpz_class next_quotient(std::size_t n) const;

  AlphaSpec spec_;
  std::size_t q_bit_budget_;
  std::optional<QuadraticSurd> surd_;
  mpq_class decimal_center_, decimal_radius_;

  mutable std::mutex mu_;
  mutable std::vector<mpz_class> a_, p_, q_;
  // Surd iteration state (P + sqrt(D)) / Q.
  mutable mpz_class sP_, sQ_, sD_, sIsqrt_;
  mutable std::vector<mpz_class> decimal_quotients_;
};

using AlphaPtr = std::shared_ptr<const Alpha>;

AlphaPtr make_alpha(std::string_view spec_text);
AlphaPtr make_alpha(AlphaSpec spec);

// Common constants used across the project and its tests.
namespace specs {
inline constexpr std::string_view kSqrt2 = "surd:0,1,2,1";
inline constexpr std::string_view kSqrt3 = "surd:0,1,3,1";
inline constexpr std::string_view kGolden = "cf:[1;(1)]";
}  // namespace specs

}  // namespace osc
