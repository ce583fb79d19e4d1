#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "osc/cf_engine.hpp"
#include "osc/mu_tau.hpp"
#include "osc/ostrowski.hpp"

namespace osc {

// Convergent evidence for liminf of q_n^beta ||q_n alpha|| over one parity.
enum class MuClass { Zero, Infinite, Bounded };
const char* mu_class_name(MuClass c);

struct MuEvidence {
  MuClass cls = MuClass::Bounded;
  std::optional<CertifiedReal> early, late;  // minima over [D/4, D/2) and [3D/4, D]
};
// Zero: late <= tol or late < 3/4 early. Infinite: late > 2 early and late >= 1.
MuEvidence classify_mu(const ConvergentTable& t, const Exponent& beta, Parity parity, double tol = 1e-3);

enum class RhoCase { Auto, Case1, Case2, Case3 };
const char* rho_case_name(RhoCase c);
RhoCase parse_rho_case(std::string_view text);  // auto|case1|case2|case3

struct RhoTargetEntry {
  std::size_t j = 0;  // 1-based
  mpq_class target;
  std::size_t m = 0;  // chosen convergent index
  mpz_class l;        // tail length (cases 2, 3) or multiplier (case 1)
  mpz_class k;        // the witness index; K_m in cases 2 and 3
  std::string family; // "K_m", "real-Q", "real-P"
  CertifiedReal w;    // w_k re-evaluated from the final rho
  CertifiedReal residual;
  bool ok = false;    // residual <= 1/j
};

struct RhoBuildCertificate {
  RhoCase used = RhoCase::Auto;
  Exponent beta;
  MuEvidence mu_plus, mu_minus;
  std::vector<RhoTargetEntry> entries;
  OstrowskiDigits digits;  // prefix; every later digit is zero
  bool extendable_by_zeros = true;
  std::string rho;         // reconstructed rho as text
  CertifiedReal rho_value;
  bool valid() const;
};

// Errors: DepthExhausted, HypothesisUnmet, InvalidArgument (empty targets, or
// case 3 targets on the side where mu vanishes).
RhoBuildCertificate build_rho(const ConvergentTable& t, const Exponent& beta, const std::vector<mpq_class>& targets,
                              RhoCase hint = RhoCase::Auto, double tol = 1e-3);

std::string certificate_json(const RhoBuildCertificate& c, int digits = 20);

struct BuiltAlpha {
  AlphaPtr alpha;
  std::string spec;
  std::size_t depth_reached = 0;  // largest n <= n_max with q_n inside the budget
  bool complete = false;          // depth_reached == n_max
};

// rule:asym:beta,C; `swap` moves the large quotients to even indices.
BuiltAlpha build_asymmetric_alpha(const Exponent& beta, const mpz_class& C, std::size_t n_max, bool swap = false);
// rule:liouville:beta
BuiltAlpha build_liouville_alpha(const Exponent& beta, std::size_t n_max);

}  // namespace osc
