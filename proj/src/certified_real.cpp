#include "osc/certified_real.hpp"

#include <mpfr.h>

#include <cstdlib>
#include <sstream>

#include "osc/error.hpp"

namespace osc {

namespace {

mpz_class floor_q(const mpq_class& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

mpz_class ceil_q(const mpq_class& x) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

class Mpfr {
 public:
  explicit Mpfr(long prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

mpq_class to_q(mpfr_ptr x) {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), x);
  return q;
}

// x^(num/den) rounded in direction rnd, for exact x >= 0.
mpq_class directed_pow(const mpq_class& x, const Exponent& e, long prec, mpfr_rnd_t rnd) {
  if (sgn(x) == 0) return 0;
  Mpfr t(prec);
  mpfr_set_q(t.get(), x.get_mpq_t(), rnd);
  const mpz_class& num = e.value().get_num();
  const mpz_class& den = e.value().get_den();
  mpfr_pow_z(t.get(), t.get(), num.get_mpz_t(), rnd);
  if (den != 1) mpfr_rootn_ui(t.get(), t.get(), den.get_ui(), rnd);
  return to_q(t.get());
}

}  // namespace

// ---------------------------------------------------------------- Exponent

Exponent::Exponent(const mpq_class& value) : value_(value) {
  value_.canonicalize();
  if (sgn(value_) <= 0) throw Error(ErrorCode::InvalidArgument, "exponent must be positive");
  if (!value_.get_den().fits_ulong_p() || !value_.get_num().fits_ulong_p())
    throw Error(ErrorCode::InvalidArgument, "exponent out of range");
}

Exponent Exponent::parse(std::string_view text) { return Exponent(parse_rational(text)); }

unsigned long Exponent::integer() const {
  if (!is_integer()) throw Error(ErrorCode::InvalidArgument, "exponent is not integral");
  return value_.get_num().get_ui();
}

mpz_class Exponent::ceil() const { return ceil_q(value_); }

std::string Exponent::str() const {
  if (is_integer()) return value_.get_num().get_str();
  // Prefer a terminating decimal when there is one.
  mpz_class den = value_.get_den();
  while (den % 2 == 0) den /= 2;
  while (den % 5 == 0) den /= 5;
  if (den == 1) {
    std::string s = rational_decimal(value_, 30);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
  return value_.get_str();
}

// ----------------------------------------------------------- CertifiedReal

CertifiedReal::CertifiedReal(mpq_class center, mpq_class radius)
    : center_(std::move(center)), radius_(std::move(radius)) {
  if (sgn(radius_) < 0) throw Error(ErrorCode::InvalidArgument, "negative radius");
}

CertifiedReal CertifiedReal::from_bounds(const mpq_class& lo, const mpq_class& hi) {
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "empty interval");
  return CertifiedReal((lo + hi) / 2, (hi - lo) / 2);
}

bool CertifiedReal::contains(const mpq_class& x) const {
  return lower() <= x && x <= upper();
}

std::optional<int> CertifiedReal::sign() const {
  if (is_exact()) return sgn(center_);
  if (center_ - radius_ > 0) return 1;
  if (center_ + radius_ < 0) return -1;
  return std::nullopt;
}

CertifiedReal CertifiedReal::rounded(long bits) const {
  if (center_.get_den() == 1 && radius_.get_den() == 1) return *this;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, static_cast<unsigned long>(bits));
  mpq_class scaled = center_ * scale;
  mpz_class n = floor_q(scaled + mpq_class(1, 2));
  mpq_class c(n, scale);
  c.canonicalize();
  if (c == center_ && radius_.get_den() <= scale) return *this;
  mpq_class diff = center_ - c;
  if (diff < 0) diff = -diff;
  mpq_class r = radius_ + diff;
  if (sgn(r) != 0) {
    mpq_class rr(ceil_q(r * scale), scale);
    rr.canonicalize();
    r = rr;
  }
  return CertifiedReal(c, r);
}

CertifiedReal CertifiedReal::abs() const {
  if (center_ >= 0) return *this;
  return CertifiedReal(-center_, radius_);
}

CertifiedReal& CertifiedReal::operator+=(const CertifiedReal& o) {
  center_ += o.center_;
  radius_ += o.radius_;
  return *this;
}

CertifiedReal& CertifiedReal::operator-=(const CertifiedReal& o) {
  center_ -= o.center_;
  radius_ += o.radius_;
  return *this;
}

CertifiedReal& CertifiedReal::operator*=(const CertifiedReal& o) {
  mpq_class r = ::abs(center_) * o.radius_ + ::abs(o.center_) * radius_ + radius_ * o.radius_;
  center_ *= o.center_;
  radius_ = r;
  return *this;
}

CertifiedReal CertifiedReal::divided(const mpq_class& d) const {
  if (sgn(d) == 0) throw Error(ErrorCode::InvalidArgument, "division by zero");
  return CertifiedReal(center_ / d, radius_ / ::abs(d));
}

CertifiedReal CertifiedReal::inverse() const {
  auto s = sign();
  if (!s || *s == 0) throw Error(ErrorCode::AmbiguousSign, "reciprocal of a ball containing 0");
  mpq_class lo = lower(), hi = upper();
  mpq_class a = 1 / hi, b = 1 / lo;
  if (b < a) std::swap(a, b);
  return from_bounds(a, b);
}

CertifiedReal CertifiedReal::pow(const Exponent& e, long bits) const {
  mpq_class lo = lower(), hi = upper();
  if (hi < 0) throw Error(ErrorCode::InvalidArgument, "power of a negative ball");
  if (lo < 0) lo = 0;
  if (e.is_integer()) {
    unsigned long n = e.integer();
    mpq_class a, b;
    mpz_pow_ui(a.get_num_mpz_t(), lo.get_num_mpz_t(), n);
    mpz_pow_ui(a.get_den_mpz_t(), lo.get_den_mpz_t(), n);
    mpz_pow_ui(b.get_num_mpz_t(), hi.get_num_mpz_t(), n);
    mpz_pow_ui(b.get_den_mpz_t(), hi.get_den_mpz_t(), n);
    a.canonicalize();
    b.canonicalize();
    if (is_exact()) return CertifiedReal(a).rounded(bits + 8);
    return from_bounds(a, b).rounded(bits + 8);
  }
  long prec = bits + 32;
  // Bits of the integral part must be carried too.
  long mag = static_cast<long>(mpz_sizeinbase(floor_q(hi).get_mpz_t(), 2));
  prec += mag * static_cast<long>(e.value().get_num().get_ui() / e.value().get_den().get_ui() + 1);
  mpq_class a = directed_pow(lo, e, prec, MPFR_RNDD);
  mpq_class b = directed_pow(hi, e, prec, MPFR_RNDU);
  return from_bounds(a, b).rounded(bits + 8);
}

std::string CertifiedReal::decimal(int digits) const { return rational_decimal(center_, digits); }

std::string CertifiedReal::scientific(int significant) const {
  if (sgn(center_) == 0) return "0";
  Mpfr t(static_cast<long>(significant) * 4 + 64);
  mpfr_set_q(t.get(), center_.get_mpq_t(), MPFR_RNDN);
  std::string fmt = "%." + std::to_string(significant - 1) + "RNe";
  char buf[256];
  mpfr_snprintf(buf, sizeof buf, fmt.c_str(), t.get());
  return buf;
}

std::string CertifiedReal::radius_string() const {
  if (sgn(radius_) == 0) return "0";
  Mpfr t(64);
  mpfr_set_q(t.get(), radius_.get_mpq_t(), MPFR_RNDU);
  char buf[64];
  mpfr_snprintf(buf, sizeof buf, "%.3RUe", t.get());
  return buf;
}

CertifiedReal hull(const CertifiedReal& a, const CertifiedReal& b) {
  mpq_class lo = a.lower() < b.lower() ? a.lower() : b.lower();
  mpq_class hi = a.upper() > b.upper() ? a.upper() : b.upper();
  return CertifiedReal::from_bounds(lo, hi);
}

mpq_class pow2_neg(long bits) {
  mpq_class r(1);
  mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(bits));
  r.canonicalize();
  return r;
}

mpq_class parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw Error(ErrorCode::Parse, "empty number");
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      mpq_class q(mpz_class(s.substr(0, slash), 10), mpz_class(s.substr(slash + 1), 10));
      if (q.get_den() == 0) throw Error(ErrorCode::Parse, "zero denominator in '" + s + "'");
      q.canonicalize();
      return q;
    }
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      i = 1;
    }
    auto dot = s.find('.', i);
    std::string int_part = s.substr(i, dot == std::string::npos ? std::string::npos : dot - i);
    std::string frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (int_part.empty()) int_part = "0";
    for (char c : int_part + frac_part)
      if (c < '0' || c > '9') throw Error(ErrorCode::Parse, "bad number '" + s + "'");
    mpz_class num(int_part + frac_part, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_part.size());
    mpq_class q(num, den);
    q.canonicalize();
    return neg ? mpq_class(-q) : q;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::Parse, "bad number '" + s + "'");
  }
}

std::string rational_decimal(const mpq_class& x, int digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class n = floor_q(::abs(x) * scale + mpq_class(1, 2));
  std::string s = n.get_str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
  if (digits > 0) s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  if (sgn(x) < 0 && n != 0) s.insert(0, "-");
  return s;
}

// -------------------------------------------------------- signed fraction

SignedFrac signed_frac(const CertifiedReal& x) {
  mpq_class half(1, 2);
  mpz_class n_lo = floor_q(x.lower() + half);
  mpz_class n_hi = floor_q(x.upper() + half);
  if (n_lo != n_hi)
    throw Error(ErrorCode::AmbiguousAtHalfInteger, "enclosure meets Z + 1/2, refine precision");
  SignedFrac out;
  out.shift = n_lo;
  out.value = x - CertifiedReal(mpq_class(n_lo));
  auto s = out.value.sign();
  if (!s) throw Error(ErrorCode::AmbiguousSign, "signed fractional part straddles 0");
  out.sign = *s;
  return out;
}

CertifiedReal dist_nearest_int(const CertifiedReal& x) {
  // ||.|| is 1-Lipschitz, so ||center|| +- radius is a valid enclosure.
  mpq_class c = x.center();
  mpq_class f = c - mpq_class(floor_q(c));
  mpq_class d = f <= mpq_class(1, 2) ? f : mpq_class(1 - f);
  mpq_class lo = d - x.radius(), hi = d + x.radius();
  if (lo < 0) lo = 0;
  if (hi > mpq_class(1, 2)) hi = mpq_class(1, 2);
  return CertifiedReal::from_bounds(lo, hi);
}

// ---------------------------------------------------------- sign policies

PrecisionPolicy PrecisionPolicy::from_env() {
  PrecisionPolicy p;
  if (const char* cap = std::getenv("OSC_PRECISION_CAP")) {
    long v = std::strtol(cap, nullptr, 10);
    if (v >= 64) p.max_bits = v;
  }
  return p;
}

int certify_sign(const CertifiedReal& x) {
  auto s = x.sign();
  if (!s) throw Error(ErrorCode::AmbiguousSign, "enclosure contains 0");
  return *s;
}

int certify_sign(const Evaluator& eval, long max_bits, long start_bits) {
  for (long bits = start_bits;; bits *= 2) {
    if (bits > max_bits) bits = max_bits;
    CertifiedReal x = eval(bits);
    if (auto s = x.sign()) return *s;
    if (bits >= max_bits)
      throw Error(ErrorCode::PrecisionCapExceeded,
                  "sign undecided at " + std::to_string(max_bits) + " bits");
  }
}

}  // namespace osc
