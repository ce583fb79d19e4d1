#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "osc/cf_engine.hpp"
#include "osc/orbit.hpp"
#include "osc/ostrowski.hpp"

namespace osc {

struct ScanEntry {
  mpz_class k;
  CertifiedReal value;  // k^beta <k alpha - rho>_2
  int sign = 0;
};

// Sign-filtered running minima of |w_k| over 1 <= k <= N.
struct ScanRecord {
  std::uint64_t N = 0;
  Exponent beta;
  std::string alpha, rho;
  std::vector<ScanEntry> entries;  // increasing k; |value| strictly decreasing per sign
  // Magnitudes of the final minima and their indices; empty if a side never occurs.
  std::optional<CertifiedReal> final_min_plus, final_min_minus;
  mpz_class k_plus, k_minus;

  // Running minimum of one side restricted to k <= bound.
  std::optional<CertifiedReal> min_upto(int sign, std::uint64_t bound) const;
};

// Exact sign-filtered running minima; threads only split the range.
ScanRecord scan_mu(const Orbit& orbit, const Exponent& beta, std::uint64_t N, unsigned threads = 1);

enum class VerdictHint { EvidenceZero, BoundedBelow, Inconclusive };
const char* verdict_hint_name(VerdictHint v);

struct MuEstimate {
  Exponent beta;
  std::string rho;
  std::uint64_t N = 0;
  std::optional<CertifiedReal> mu_plus_upper, mu_minus_upper;
  VerdictHint hint_plus = VerdictHint::Inconclusive, hint_minus = VerdictHint::Inconclusive;
  double tol = 1e-3;
};

// evidence-zero: upper <= tol. bounded-below: upper > tol and the minimum
// over k <= N is at least half the minimum over k <= N/10.
MuEstimate estimate_mu(const ScanRecord& rec, double tol = 1e-3);

enum class Parity { Even, Odd };

// min over from <= n <= upto of the parity, with q_divisor | q_n, of q_n^beta ||q_n alpha||.
// Index 0 counts as even when a_1 >= 2 (then <alpha>_2 = {alpha} > 0).
// Empty when no index matches.
struct ConvergentMin {
  CertifiedReal value;
  std::size_t index = 0;
};
std::optional<ConvergentMin> convergent_mu(const ConvergentTable& t, const Exponent& beta, Parity parity,
                                           const mpz_class& q_divisor, std::size_t upto, std::size_t from = 0);

struct Lemma2Report {
  bool holds = false;
  mpz_class scan_k_plus, scan_k_minus, conv_k_plus, conv_k_minus;
  std::optional<CertifiedReal> scan_min_plus, scan_min_minus, conv_min_plus, conv_min_minus;
};
// Brute force over k <= q_N against the convergent minima, both signs, same argmin.
Lemma2Report check_lemma2_report(const ConvergentTable& t, const Exponent& beta, std::size_t N,
                                 unsigned threads = 1);
inline bool check_lemma2(const ConvergentTable& t, const Exponent& beta, std::size_t N) {
  return check_lemma2_report(t, beta, N).holds;
}

struct SpectrumReport {
  std::set<mpz_class> found;           // {k < q_{n+2} : ||k alpha|| <= ||q_n alpha||}
  std::set<mpz_class> positive;        // members with <k alpha>_2 > 0
  std::set<mpz_class> predicted;       // union of both families
  std::set<mpz_class> predicted_pos;   // {q_n + l q_{n+1}}
  bool contained = false, positive_exact = false;
  bool holds() const { return contained && positive_exact; }
};
SpectrumReport small_norm_spectrum(const ConvergentTable& t, std::size_t n);

struct TauEstimate {
  std::optional<CertifiedReal> tau_plus_upper, tau_minus_upper;
  std::size_t index_plus = 0, index_minus = 0;
  bool terminating = false;  // digits vanish beyond some point within depth
};
TauEstimate tau_estimate(const ConvergentTable& t, const Exponent& beta, const OstrowskiDigits& d,
                         std::size_t upto);

struct Witness {
  mpz_class k;
  CertifiedReal value;  // re-evaluated from scratch
  mpz_class m, l;
  std::string construction;  // "rational-Q", "real-Q", "real-P"
};

// Rational rho = p/q: k = (l_h q + 1) m for m taken from a scan over k <= scan_bound.
Witness rational_witness(const ConvergentTable& t, const Exponent& beta, const mpz_class& p, const mpz_class& q,
                         const mpq_class& h, const mpq_class& tol, std::uint64_t scan_bound = 1000000);

// rho given by its digits: k = K_{m-1} + (e_m + l) q_m or K_{m-1} + l q_m - q_{m-1}.
Witness real_witness(const ConvergentTable& t, const Exponent& beta, const OstrowskiDigits& d, const mpq_class& h,
                     const mpq_class& tol);

std::string scan_csv(const ScanRecord& rec, int digits = 20);
std::string scan_json(const ScanRecord& rec, int digits = 20);
std::string mu_json(const MuEstimate& est, int digits = 20);

}  // namespace osc
