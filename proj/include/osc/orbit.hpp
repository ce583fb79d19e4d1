#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "osc/alpha.hpp"
#include "osc/certified_real.hpp"

namespace osc {

// c0 + c1*alpha + c2*atom, atom being rho's independent irrational (if any).
struct LinForm {
  mpq_class c0{0}, c1{0}, c2{0};

  static LinForm constant(const mpq_class& c) { return {c, 0, 0}; }
  static LinForm alpha_times(const mpq_class& c) { return {0, c, 0}; }
  bool is_rational() const { return sgn(c1) == 0 && sgn(c2) == 0; }

  LinForm& operator+=(const LinForm& o);
  LinForm& operator-=(const LinForm& o);
  LinForm& operator*=(const mpq_class& s);
  friend bool operator==(const LinForm& a, const LinForm& b) {
    return a.c0 == b.c0 && a.c1 == b.c1 && a.c2 == b.c2;
  }
};

inline LinForm operator+(LinForm a, const LinForm& b) { return a += b; }
inline LinForm operator-(LinForm a, const LinForm& b) { return a -= b; }
inline LinForm operator*(LinForm a, const mpq_class& s) { return a *= s; }
inline LinForm operator*(const mpq_class& s, LinForm a) { return a *= s; }
inline LinForm operator-(LinForm a) { return a *= mpq_class(-1); }

// The inhomogeneous shift rho = form, where form may reference alpha and an
// independent atom. Text forms: "p/q", "0.25", "lin:c0,c1" (= c0 + c1*alpha),
// or any alpha spec (independent irrational).
struct Rho {
  LinForm form;
  AlphaPtr atom;  // set iff form.c2 != 0
  std::string text;

  static Rho parse(std::string_view text);
  static Rho rational(const mpq_class& r);
  static Rho linear(const mpq_class& c0, const mpq_class& c1);
  static Rho from_form(const LinForm& f, std::string text = {});
  bool is_rational() const { return form.is_rational(); }
  // Exact value when rational.
  const mpq_class& rational_value() const { return form.c0; }
  std::string str() const { return text; }
};

// base^beta * form with base > 0 rational.
struct Term {
  mpq_class base{1};
  Exponent beta;
  LinForm form;
};

// Certified geometry of k*alpha - rho mod 1 for a fixed (alpha, rho).
class Orbit {
 public:
  Orbit(AlphaPtr alpha, Rho rho, PrecisionPolicy policy = PrecisionPolicy::from_env());

  const Alpha& alpha() const { return *alpha_; }
  const AlphaPtr& alpha_ptr() const { return alpha_; }
  const Rho& rho() const { return rho_; }
  const PrecisionPolicy& policy() const { return policy_; }

  // Enclosure with radius <= 2^-bits (may throw PrecisionExhausted for decimals).
  CertifiedReal eval(const LinForm& f, long bits) const;
  // Exact when f does not involve the atom; otherwise escalates to the cap.
  int sign(const LinForm& f) const;
  mpz_class floor(const LinForm& f) const;

  CertifiedReal eval(const Term& t, long bits) const;
  // Enclosure with radius <= 2^-rel_bits * |value|; exact 0 when the form vanishes.
  CertifiedReal eval_rel(const Term& t, long rel_bits = 64) const;
  double approx(const Term& t) const { return eval_rel(t, 40).approx(); }
  int sign(const Term& t) const;
  // sign(a - b)
  int compare(const Term& a, const Term& b) const;

  // k*alpha - rho
  LinForm shifted(const mpz_class& k) const;
  // <k*alpha - rho>_2 as an exact form, plus the integer removed.
  LinForm frac_form(const mpz_class& k, mpz_class* shift = nullptr) const;
  CertifiedReal frac(const mpz_class& k, long bits = 128) const;
  // w_k = k^beta * <k*alpha - rho>_2
  Term w_term(const mpz_class& k, const Exponent& beta) const;
  CertifiedReal w(const mpz_class& k, const Exponent& beta, long bits = 128) const;

  // ||f|| as a form s*(f - n), s = +-1; the distance to the nearest integer.
  LinForm dist_form(const LinForm& f) const;

 private:
  AlphaPtr alpha_;
  Rho rho_;
  PrecisionPolicy policy_;
};

}  // namespace osc
