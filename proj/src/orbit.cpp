#include "osc/orbit.hpp"

#include "osc/error.hpp"

namespace osc {

namespace {

long bitlen_q(const mpq_class& x) {
  mpz_class m = abs(x.get_num()) / x.get_den() + 1;
  return static_cast<long>(mpz_sizeinbase(m.get_mpz_t(), 2));
}

mpz_class floor_of(const mpq_class& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

mpq_class int_power(const mpq_class& base, unsigned long e) {
  mpq_class r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), e);
  r.canonicalize();
  return r;
}

bool exact_scale(const Term& t) { return t.base == 1 || t.beta.is_integer(); }

mpq_class scale_of(const Term& t) { return t.base == 1 ? mpq_class(1) : int_power(t.base, t.beta.integer()); }

}  // namespace

LinForm& LinForm::operator+=(const LinForm& o) {
  c0 += o.c0;
  c1 += o.c1;
  c2 += o.c2;
  return *this;
}

LinForm& LinForm::operator-=(const LinForm& o) {
  c0 -= o.c0;
  c1 -= o.c1;
  c2 -= o.c2;
  return *this;
}

LinForm& LinForm::operator*=(const mpq_class& s) {
  c0 *= s;
  c1 *= s;
  c2 *= s;
  return *this;
}

Rho Rho::parse(std::string_view text) {
  std::string s(text);
  if (s.rfind("lin:", 0) == 0) {
    std::string body = s.substr(4);
    auto comma = body.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::Parse, "lin: needs c0,c1");
    Rho r = linear(parse_rational(body.substr(0, comma)), parse_rational(body.substr(comma + 1)));
    r.text = s;
    return r;
  }
  if (s.find(':') != std::string::npos) {
    Rho r;
    r.atom = make_alpha(s);
    r.form = {0, 0, 1};
    r.text = r.atom->str();
    return r;
  }
  return rational(parse_rational(s));
}

Rho Rho::rational(const mpq_class& v) {
  Rho r;
  r.form = LinForm::constant(v);
  r.text = v.get_str();
  if (v.get_den() == 1) r.text += "/1";
  return r;
}

Rho Rho::linear(const mpq_class& c0, const mpq_class& c1) {
  Rho r;
  r.form = {c0, c1, 0};
  r.text = "lin:" + c0.get_str() + "," + c1.get_str();
  return r;
}

Rho Rho::from_form(const LinForm& f, std::string text) {
  if (sgn(f.c2) != 0) throw Error(ErrorCode::InvalidArgument, "Rho::from_form cannot carry an atom");
  Rho r = sgn(f.c1) == 0 ? rational(f.c0) : linear(f.c0, f.c1);
  if (!text.empty()) r.text = std::move(text);
  return r;
}

Orbit::Orbit(AlphaPtr alpha, Rho rho, PrecisionPolicy policy)
    : alpha_(std::move(alpha)), rho_(std::move(rho)), policy_(policy) {
  // A surd atom sharing alpha's radicand is not independent: fold it into alpha.
  if (rho_.atom && rho_.atom->surd() && alpha_->surd() && rho_.atom->surd()->d == alpha_->surd()->d) {
    const QuadraticSurd& A = *alpha_->surd();
    const QuadraticSurd& R = *rho_.atom->surd();
    // sqrt(d) = (c*alpha - a)/b
    mpq_class k(R.b, R.c * A.b);
    k.canonicalize();
    mpq_class c0 = mpq_class(R.a, R.c) - k * mpq_class(A.a);
    mpq_class c1 = k * mpq_class(A.c);
    c0.canonicalize();
    c1.canonicalize();
    mpq_class w = rho_.form.c2;
    rho_.form.c0 += w * c0;
    rho_.form.c1 += w * c1;
    rho_.form.c2 = 0;
    rho_.atom.reset();
  }
}

CertifiedReal Orbit::eval(const LinForm& f, long bits) const {
  CertifiedReal v = alpha_->eval_form(f.c0, f.c1, bits + 1);
  if (sgn(f.c2) != 0) {
    if (!rho_.atom) throw Error(ErrorCode::InvalidArgument, "form references a missing atom");
    v += CertifiedReal(f.c2) * rho_.atom->eval(bits + 2 + bitlen_q(f.c2));
  }
  return v;
}

int Orbit::sign(const LinForm& f) const {
  if (sgn(f.c2) == 0) return alpha_->sign_of(f.c0, f.c1);
  return certify_sign([&](long bits) { return eval(f, bits); }, policy_.max_bits, policy_.start_bits);
}

mpz_class Orbit::floor(const LinForm& f) const {
  if (f.is_rational()) return floor_of(f.c0);
  CertifiedReal v = eval(f, policy_.start_bits);
  mpz_class m = floor_of(v.center());
  if (v.lower() > m && v.upper() < m + 1) return m;
  while (sign(f - LinForm::constant(m)) < 0) m -= 1;
  while (sign(f - LinForm::constant(m + 1)) >= 0) m += 1;
  return m;
}

CertifiedReal Orbit::eval(const Term& t, long bits) const {
  if (exact_scale(t)) {
    mpq_class s = scale_of(t);
    return eval(t.form * s, bits);
  }
  CertifiedReal f0 = eval(t.form, 16);
  CertifiedReal p0 = CertifiedReal(t.base).pow(t.beta, 16);
  long fmag = bitlen_q(f0.upper() > -f0.lower() ? f0.upper() : mpq_class(-f0.lower()));
  long pmag = bitlen_q(p0.upper());
  CertifiedReal p = CertifiedReal(t.base).pow(t.beta, bits + fmag + 3);
  CertifiedReal f = eval(t.form, bits + pmag + 3);
  return p * f;
}

CertifiedReal Orbit::eval_rel(const Term& t, long rel_bits) const {
  if (sign(t.form) == 0) return CertifiedReal(0L);
  for (long bits = 64;; bits *= 2) {
    CertifiedReal v = eval(t, bits);
    mpq_class mag = abs(v.center());
    if (v.radius() * (mpz_class(1) << rel_bits) <= mag && !v.contains_zero()) return v;
    if (bits > (1L << 28)) throw Error(ErrorCode::PrecisionCapExceeded, "relative enclosure out of reach");
  }
}

int Orbit::sign(const Term& t) const { return sign(t.form); }

int Orbit::compare(const Term& a, const Term& b) const {
  if (exact_scale(a) && exact_scale(b)) return sign(a.form * scale_of(a) - b.form * scale_of(b));
  // Opposite certified signs need no precision at all.
  int sa = sign(a.form), sb = sign(b.form);
  if (sa != sb) return sa > sb ? 1 : -1;
  if (sa == 0) return 0;
  return certify_sign([&](long bits) { return eval(a, bits + 2) - eval(b, bits + 2); }, policy_.max_bits,
                      policy_.start_bits);
}

LinForm Orbit::shifted(const mpz_class& k) const { return LinForm::alpha_times(mpq_class(k)) - rho_.form; }

LinForm Orbit::frac_form(const mpz_class& k, mpz_class* shift) const {
  LinForm f = shifted(k);
  mpz_class n = floor(f + LinForm::constant(mpq_class(1, 2)));
  if (shift) *shift = n;
  return f - LinForm::constant(n);
}

CertifiedReal Orbit::frac(const mpz_class& k, long bits) const { return eval(frac_form(k), bits); }

Term Orbit::w_term(const mpz_class& k, const Exponent& beta) const {
  return Term{mpq_class(k), beta, frac_form(k)};
}

CertifiedReal Orbit::w(const mpz_class& k, const Exponent& beta, long bits) const {
  return eval(w_term(k, beta), bits);
}

LinForm Orbit::dist_form(const LinForm& f) const {
  LinForm g = f - LinForm::constant(floor(f + LinForm::constant(mpq_class(1, 2))));
  return sign(g) < 0 ? -g : g;
}

}  // namespace osc
