#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <vector>

#include "osc/cf_engine.hpp"
#include "osc/orbit.hpp"

namespace osc {

// rho = rho0 + e_0{alpha} + sum_{n>=1} e_n <q_n alpha>_2, or k = sum e_n q_n.
struct OstrowskiDigits {
  mpz_class rho0;
  std::vector<mpz_class> e;  // e_0..e_N
  std::string alpha;         // alpha spec text

  std::size_t depth() const { return e.empty() ? 0 : e.size() - 1; }
  mpz_class digit(std::size_t n) const { return n < e.size() ? e[n] : mpz_class(0); }
};

// Empty string when legal; otherwise the first violated constraint.
// `couple_index0` additionally requires e_0 = 0 when e_1 = a_2 (integer expansions).
std::string digit_violation(const OstrowskiDigits& d, const ConvergentTable& t, bool couple_index0 = false);
inline bool digits_legal(const OstrowskiDigits& d, const ConvergentTable& t, bool couple_index0 = false) {
  return digit_violation(d, t, couple_index0).empty();
}

// Greedy expansion; requires k < q_{N+1}.
OstrowskiDigits ostrowski_int(const mpz_class& k, const ConvergentTable& t);

// Digits e_0..e_N of orbit.rho(); table depth must be at least N + 1.
OstrowskiDigits ostrowski_real(const Orbit& orbit, const ConvergentTable& t, std::size_t N);

// Rewrites e_{n+1} = a_{n+2}, e_n > 0 (n >= 1) into a carry; value preserving.
void normalize_carries(OstrowskiDigits& d, const ConvergentTable& t);

// rho0 + e_0{alpha} + sum_{j=1..n} e_j <q_j alpha>_2 exactly.
LinForm reconstruct_form(const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n);
CertifiedReal reconstruct(const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n, long bits = 256);

// |rho - reconstruct(n)| <= ||q_n alpha||, decided exactly (or by escalation for atoms).
bool residue_bound_check(const Orbit& orbit, const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n);

// K_n = sum_{j<=n} e_j q_j for n = 0..N.
std::vector<mpz_class> kappa_seq(const OstrowskiDigits& d, const ConvergentTable& t);

// The finite-digit rho as an exact form (digits beyond depth are zero).
Rho digits_rho(const OstrowskiDigits& d, const ConvergentTable& t);

std::string digits_to_json(const OstrowskiDigits& d);
OstrowskiDigits digits_from_json(const std::string& text);

}  // namespace osc
