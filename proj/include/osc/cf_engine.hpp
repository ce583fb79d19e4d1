#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <vector>

#include "osc/alpha.hpp"
#include "osc/certified_real.hpp"
#include "osc/orbit.hpp"

namespace osc {

// Partial quotients, convergents and signed errors <q_n alpha>_2 up to depth N.
struct ConvergentTable {
  AlphaPtr alpha;
  std::vector<mpz_class> a, p, q;  // indices 0..N
  std::vector<SignedFrac> err;     // err[n - 1] = <q_n alpha>_2, n = 1..N

  std::size_t depth() const { return a.size() - 1; }
  const SignedFrac& err_at(std::size_t n) const;  // n >= 1
  // q_n*alpha - p_n exactly; for n = 0 this is {alpha}.
  LinForm err_form(std::size_t n) const;
  // ||q_n alpha|| for n >= 1, {alpha} for n = 0.
  LinForm theta_form(std::size_t n) const;
  // (-1)^n, with index 0 counted as +1.
  static int parity_sign(std::size_t n) { return n % 2 == 0 ? 1 : -1; }
};

ConvergentTable build_table(const AlphaPtr& alpha, std::size_t N, long bits = 128);

struct TailIdentity {
  LinForm residual_form;   // exact
  CertifiedReal residual;  // enclosure
  CertifiedReal bound;     // ||q_{n+2*terms-1} alpha||
  bool holds = false;      // |residual| <= bound, decided exactly
};

// <q_n a>_2 + sum_{i=1..terms} a_{n+2i} <q_{n+2i-1} a>_2 against its tail bound.
TailIdentity alternating_tail_identity_check(const ConvergentTable& table, std::size_t n, std::size_t terms);

// Partial quotients shared by every point of an enclosure (all but the last common term).
std::vector<mpz_class> cf_prefix_from_enclosure(const CertifiedReal& x, std::size_t limit = 4096);

// CSV with columns n,a_n,p_n,q_n,signed_err,radius.
std::string table_csv(const ConvergentTable& table, int digits = 30);

}  // namespace osc
