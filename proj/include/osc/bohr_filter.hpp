#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "osc/cf_engine.hpp"
#include "osc/orbit.hpp"
#include "osc/ostrowski.hpp"

namespace osc {

// form / (1 + e^beta), with 0^beta = 0.
struct BohrRadius {
  LinForm form;
  mpz_class e{0};
  Exponent beta;

  static BohrRadius of(const LinForm& f) { return BohrRadius{f, 0, Exponent()}; }
  static BohrRadius rational(const mpq_class& r) { return of(LinForm::constant(r)); }
};

// {k in [from, N] : ||k alpha - rho|| <= eps}, boundary counted as a member.
struct BohrWindow {
  mpz_class N;
  CertifiedReal eps;
  std::vector<mpz_class> members;
};

BohrWindow bohr_set(const Orbit& o, const mpz_class& N, const BohrRadius& eps, const mpz_class& from = 1);

// Exact membership test of a single index.
bool in_window(const Orbit& o, const mpz_class& k, const BohrRadius& eps);

// Superset of the window members in [lo, hi] for the rational bound eps_upper.
// Brute force with fixed-point stepping for short ranges, otherwise an
// output-sensitive walk over a convergent approximation of alpha.
void window_candidates(const Orbit& o, const mpz_class& lo, const mpz_class& hi, const mpq_class& eps_upper,
                       const std::function<void(const mpz_class&)>& emit);

struct Provenance {
  std::size_t n = 0;
  bool prime = false;  // from N'_rho(n) rather than N_rho(n)
};

struct FrakD {
  std::size_t n_max = 0;
  std::set<mpz_class> members;
  std::map<mpz_class, Provenance> provenance;  // first window containing k
};

// ||q_n alpha|| for n >= 0 (||alpha|| at n = 0).
LinForm theta_norm(const Orbit& o, const ConvergentTable& t, std::size_t n);

// D = union over n = 1..n_max of N_rho(n) and N'_rho(n). Needs digits depth >= n_max.
FrakD frak_D(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d, const Exponent& beta,
             std::size_t n_max);

struct Covering {
  std::set<mpz_class> M, M_prime;
};
// Stated: M = {K_n + (e_n - l) q_n}. Derived: M = {K_n - l q_n}, l = 0..2.
// M' is the same in both.
enum class CoveringRule { Stated, Derived };
Covering covering_sets(const ConvergentTable& t, const OstrowskiDigits& d, std::size_t n,
                       CoveringRule rule = CoveringRule::Stated);

struct InclusionReport {
  bool kappa_in_D = true, D_covered = true, nesting = true;
  std::vector<std::string> violations;
  bool holds() const { return kappa_in_D && D_covered && nesting; }
};
// The covering union runs over n = 0..n_max+1.
InclusionReport verify_inclusions(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d,
                                  const Exponent& beta, std::size_t n_max, CoveringRule rule = CoveringRule::Stated);

struct FilterTracePoint {
  mpz_class N;
  std::optional<CertifiedReal> block_min;  // min |w_k| over the block's complement; empty = >= cap
  std::optional<CertifiedReal> m;          // cumulative m(N); empty = >= cap
  bool exhaustive = false;                 // block scanned in full (minimum exact without cap)
};

struct FilterReport {
  mpq_class H;
  mpz_class N;
  bool hypothesis_ok = false;  // q_n^beta ||q_n alpha|| >= 4H for all n in [n_h, depth]
  std::optional<std::size_t> n_h;
  std::optional<mpz_class> threshold;  // K_{n_h} + q_{n_h}
  bool vacuous = false;                // threshold beyond N
  std::vector<FilterTracePoint> trace;
  std::vector<std::pair<mpz_class, CertifiedReal>> complement_hits;  // |w_k| < H, k not in D
  std::vector<mpz_class> violations;                                  // hits with k >= threshold
  std::size_t hit_count = 0;
  bool truncated = false;  // scan stopped at max_hits
  bool holds() const { return hypothesis_ok && violations.empty(); }
};

// Membership in D using every level available in both the digits and the table.
class FrakDOracle {
 public:
  FrakDOracle(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d, const Exponent& beta);
  bool contains(const mpz_class& k) const;
  std::size_t levels() const { return levels_.size(); }

 private:
  struct Level {
    mpz_class bound;
    BohrRadius radius;
    CertifiedReal enclosure;
  };
  const Orbit* o_;
  std::vector<Level> levels_;
};

FilterReport filter_check(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d, const Exponent& beta,
                          const mpz_class& N, const mpq_class& H, std::size_t max_hits = 0);

std::string frak_json(const FrakD& D, const FilterReport* filter = nullptr, int digits = 20);
std::string filter_json(const FilterReport& r, int digits = 20);

namespace detail {
// min y >= 0 with (a*y + b) mod m <= c, for 0 <= b < m, 0 <= c < m.
std::optional<mpz_class> first_hit(mpz_class a, mpz_class b, const mpz_class& m, const mpz_class& c);
// The output-sensitive path of window_candidates, exposed for testing.
void walk_candidates(const Orbit& o, const mpz_class& lo, const mpz_class& hi, mpq_class eps,
                     const std::function<void(const mpz_class&)>& emit);
inline constexpr unsigned long kBruteLimit = 20000000;
}  // namespace detail

}  // namespace osc
