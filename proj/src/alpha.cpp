#include "osc/alpha.hpp"

#include <algorithm>
#include <sstream>

#include "osc/error.hpp"

namespace osc {

namespace {

mpz_class floor_q(const mpq_class& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

std::size_t bitlen(const mpz_class& x) { return sgn(x) == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2); }

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

mpz_class parse_int(const std::string& s) {
  if (s.empty()) throw Error(ErrorCode::Parse, "empty integer");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw Error(ErrorCode::Parse, "bad integer '" + s + "'");
  for (std::size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') throw Error(ErrorCode::Parse, "bad integer '" + s + "'");
  return mpz_class(s[0] == '+' ? s.substr(1) : s, 10);
}

std::vector<mpz_class> parse_int_list(std::string_view s) {
  std::vector<mpz_class> out;
  for (auto& item : split(s, ','))
    if (!item.empty()) out.push_back(parse_int(item));
  return out;
}

std::string join(const std::vector<mpz_class>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i].get_str();
  }
  return s;
}

// Convergent numerator/denominator of a finite list: returns (h_last, k_last, h_prev, k_prev).
struct FiniteConvergent {
  mpz_class h, k, h_prev, k_prev;
};

FiniteConvergent finite_convergent(const std::vector<mpz_class>& terms) {
  FiniteConvergent f{1, 0, 0, 1};
  for (const auto& t : terms) {
    mpz_class h = t * f.h + f.h_prev;
    mpz_class k = t * f.k + f.k_prev;
    f.h_prev = f.h;
    f.k_prev = f.k;
    f.h = h;
    f.k = k;
  }
  return f;
}

QuadraticSurd normalize_surd(mpz_class a, mpz_class b, mpz_class d, mpz_class c) {
  for (unsigned long f = 2; f <= 100000; ++f) {
    mpz_class f2 = mpz_class(f) * f;
    if (f2 > d) break;
    while (d % f2 == 0) {
      d /= f2;
      b *= f;
    }
  }
  if (c < 0) {
    a = -a;
    b = -b;
    c = -c;
  }
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  if (g > 1) {
    a /= g;
    b /= g;
    c /= g;
  }
  return {a, b, d, c};
}

QuadraticSurd periodic_to_surd(const PeriodicCF& cf) {
  FiniteConvergent per = finite_convergent(cf.period);
  mpz_class A = per.k, B = per.k_prev - per.h, C = -per.h_prev;
  mpz_class D = B * B - 4 * A * C;
  FiniteConvergent pre = finite_convergent(cf.preperiod);
  const mpz_class &p = pre.h, &pp = pre.h_prev, &q = pre.k, &qp = pre.k_prev;
  mpz_class u = 2 * A * pp - p * B;
  mpz_class v = 2 * A * qp - q * B;
  return normalize_surd(u * v - p * q * D, p * v - u * q, D, v * v - q * q * D);
}

// CF expansion of an exact rational, at most `limit` terms.
std::vector<mpz_class> rational_cf(mpq_class x, std::size_t limit) {
  std::vector<mpz_class> out;
  while (out.size() < limit) {
    mpz_class a = floor_q(x);
    out.push_back(a);
    mpq_class f = x - a;
    if (sgn(f) == 0) break;
    x = 1 / f;
  }
  return out;
}

// ------------------------------------------------------------------ rules

struct RuleParams {
  Exponent beta;
  mpz_class c, d;
  bool swap = false;
};

RuleParams check_rule(const RuleCF& r) {
  RuleParams out;
  auto need = [&](std::size_t n) {
    if (r.params.size() != n)
      throw Error(ErrorCode::RuleFailure,
                  "rule '" + r.name + "' expects " + std::to_string(n) + " parameter(s)");
  };
  try {
    if (r.name == "liouville") {
      need(1);
      out.beta = Exponent::parse(r.params[0]);
    } else if (r.name == "asym") {
      if (r.params.size() == 3) {
        if (r.params[2] != "swap") throw Error(ErrorCode::RuleFailure, "asym third parameter must be 'swap'");
        out.swap = true;
      } else {
        need(2);
      }
      out.beta = Exponent::parse(r.params[0]);
      out.c = parse_int(r.params[1]);
      if (out.beta.value() < 1) throw Error(ErrorCode::RuleFailure, "asym needs beta >= 1");
      if (out.c < 1) throw Error(ErrorCode::RuleFailure, "asym needs C >= 1");
    } else if (r.name == "linear") {
      need(2);
      out.c = parse_int(r.params[0]);
      out.d = parse_int(r.params[1]);
      if (out.c < 0 || out.c + out.d < 1)
        throw Error(ErrorCode::RuleFailure, "linear needs c >= 0 and c + d >= 1");
    } else if (r.name == "e") {
      if (!r.params.empty()) need(0);
    } else {
      throw Error(ErrorCode::RuleFailure, "unknown rule '" + r.name + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::RuleFailure) throw;
    throw Error(ErrorCode::RuleFailure, std::string("rule '") + r.name + "': " + e.what());
  }
  return out;
}

// floor(n * q^(r)) for rational r = num/den >= 0.
mpz_class floor_scaled_power(unsigned long n, const mpz_class& q, const mpq_class& r) {
  const mpz_class& num = r.get_num();
  const mpz_class& den = r.get_den();
  mpz_class qn;
  mpz_pow_ui(qn.get_mpz_t(), q.get_mpz_t(), num.get_ui());
  if (den == 1) return qn * n;
  mpz_class x;
  mpz_ui_pow_ui(x.get_mpz_t(), n, den.get_ui());
  x *= qn;
  mpz_class root;
  mpz_root(root.get_mpz_t(), x.get_mpz_t(), den.get_ui());
  return root;
}

mpz_class rule_quotient(const RuleCF& r, const RuleParams& params, std::size_t n,
                        const std::vector<mpz_class>& q) {
  if (r.name == "liouville") {
    if (n == 0) return 0;
    if (n == 1) return 2;
    mpz_class e = params.beta.ceil() + 1;
    mpz_class out;
    mpz_pow_ui(out.get_mpz_t(), q[n - 1].get_mpz_t(), e.get_ui());
    return out;
  }
  if (r.name == "asym") {
    if (n == 0) return 0;
    if ((n % 2 == 0) != params.swap) return params.c;
    mpz_class v = floor_scaled_power(static_cast<unsigned long>(n), q[n - 1], params.beta.value() - 1);
    return v < 1 ? mpz_class(1) : v;
  }
  if (r.name == "linear") {
    if (n == 0) return 0;
    return params.c * static_cast<unsigned long>(n) + params.d;
  }
  // e = [2; 1, 2, 1, 1, 4, 1, 1, 6, ...]
  if (n == 0) return 2;
  if (n % 3 == 2) return mpz_class(static_cast<unsigned long>(2 * (n + 1) / 3));
  return 1;
}

}  // namespace

// ------------------------------------------------------------- grammar

AlphaSpec parse_alpha_spec(std::string_view text) {
  std::string s(text);
  auto colon = s.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Parse, "alpha spec needs a kind prefix: '" + s + "'");
  std::string kind = s.substr(0, colon);
  std::string body = s.substr(colon + 1);
  AlphaSpec out;
  if (kind == "surd") {
    auto parts = split(body, ',');
    if (parts.size() != 4) throw Error(ErrorCode::Parse, "surd needs a,b,d,c");
    out = QuadraticSurd{parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2]), parse_int(parts[3])};
  } else if (kind == "cf") {
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw Error(ErrorCode::Parse, "cf spec must look like cf:[a0;a1,...(p1,...)]");
    std::string inner = body.substr(1, body.size() - 2);
    auto semi = inner.find(';');
    PeriodicCF cf;
    std::string head = semi == std::string::npos ? inner : inner.substr(0, semi);
    std::string rest = semi == std::string::npos ? "" : inner.substr(semi + 1);
    cf.preperiod.push_back(parse_int(head));
    auto open = rest.find('(');
    auto close = rest.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open || close + 1 != rest.size())
      throw Error(ErrorCode::Parse, "cf spec needs a parenthesised period at the end");
    for (auto& v : parse_int_list(rest.substr(0, open))) cf.preperiod.push_back(v);
    cf.period = parse_int_list(rest.substr(open + 1, close - open - 1));
    out = cf;
  } else if (kind == "rule") {
    auto c2 = body.find(':');
    RuleCF r;
    r.name = body.substr(0, c2);
    if (c2 != std::string::npos) {
      std::string params = body.substr(c2 + 1);
      if (!params.empty()) r.params = split(params, ',');
    }
    out = r;
  } else if (kind == "dec") {
    auto at = body.find('@');
    if (at == std::string::npos) throw Error(ErrorCode::Parse, "dec spec needs @count");
    DecimalLiteral d;
    d.digits = body.substr(0, at);
    d.count = static_cast<int>(parse_int(body.substr(at + 1)).get_si());
    out = d;
  } else {
    throw Error(ErrorCode::Parse, "unknown alpha kind '" + kind + "'");
  }
  validate(out);
  return out;
}

std::string format_alpha_spec(const AlphaSpec& spec) {
  struct Visitor {
    std::string operator()(const QuadraticSurd& s) const {
      return "surd:" + s.a.get_str() + "," + s.b.get_str() + "," + s.d.get_str() + "," + s.c.get_str();
    }
    std::string operator()(const PeriodicCF& cf) const {
      std::string s = "cf:[" + cf.preperiod.front().get_str() + ";";
      std::vector<mpz_class> tail(cf.preperiod.begin() + 1, cf.preperiod.end());
      if (!tail.empty()) s += join(tail) + ",";
      return s + "(" + join(cf.period) + ")]";
    }
    std::string operator()(const RuleCF& r) const {
      std::string s = "rule:" + r.name + ":";
      for (std::size_t i = 0; i < r.params.size(); ++i) s += (i ? "," : "") + r.params[i];
      return s;
    }
    std::string operator()(const DecimalLiteral& d) const {
      return "dec:" + d.digits + "@" + std::to_string(d.count);
    }
  };
  return std::visit(Visitor{}, spec);
}

void validate(const AlphaSpec& spec) {
  if (auto* s = std::get_if<QuadraticSurd>(&spec)) {
    if (s->d <= 0) throw Error(ErrorCode::InvalidArgument, "surd needs d > 0");
    if (mpz_perfect_square_p(s->d.get_mpz_t())) throw Error(ErrorCode::InvalidArgument, "surd d is a perfect square");
    if (s->b == 0) throw Error(ErrorCode::InvalidArgument, "surd needs b != 0");
    if (s->c == 0) throw Error(ErrorCode::InvalidArgument, "surd needs c != 0");
  } else if (auto* cf = std::get_if<PeriodicCF>(&spec)) {
    if (cf->preperiod.empty()) throw Error(ErrorCode::InvalidArgument, "cf needs a0");
    if (cf->period.empty()) throw Error(ErrorCode::InvalidArgument, "cf period must be nonempty");
    for (std::size_t i = 1; i < cf->preperiod.size(); ++i)
      if (cf->preperiod[i] < 1) throw Error(ErrorCode::InvalidArgument, "partial quotients a_n >= 1 for n >= 1");
    for (const auto& v : cf->period)
      if (v < 1) throw Error(ErrorCode::InvalidArgument, "partial quotients a_n >= 1 for n >= 1");
  } else if (auto* r = std::get_if<RuleCF>(&spec)) {
    check_rule(*r);
  } else if (auto* d = std::get_if<DecimalLiteral>(&spec)) {
    if (d->count < 0) throw Error(ErrorCode::InvalidArgument, "dec count must be >= 0");
    parse_rational(d->digits);
  }
}

int surd_sign(const mpz_class& A, const mpz_class& B, const mpz_class& d) {
  int sa = sgn(A), sb = sgn(B);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  // Opposite signs: compare A^2 with B^2 d.
  mpz_class lhs = A * A, rhs = B * B * d;
  int c = cmp(lhs, rhs);
  return c > 0 ? sa : sb;  // c == 0 impossible for non-square d
}

// ------------------------------------------------------------------ Alpha

Alpha::Alpha(AlphaSpec spec, std::size_t q_bit_budget) : spec_(std::move(spec)), q_bit_budget_(q_bit_budget) {
  validate(spec_);
  if (auto* s = std::get_if<QuadraticSurd>(&spec_)) {
    surd_ = normalize_surd(s->a, s->b, s->d, s->c);
  } else if (auto* cf = std::get_if<PeriodicCF>(&spec_)) {
    surd_ = periodic_to_surd(*cf);
  } else if (auto* d = std::get_if<DecimalLiteral>(&spec_)) {
    decimal_center_ = parse_rational(d->digits);
    mpz_class ten;
    mpz_ui_pow_ui(ten.get_mpz_t(), 10, static_cast<unsigned long>(d->count));
    decimal_radius_ = mpq_class(1, 1) / mpq_class(ten);
    auto lo = rational_cf(decimal_center_ - decimal_radius_, 4096);
    auto hi = rational_cf(decimal_center_ + decimal_radius_, 4096);
    std::size_t common = 0;
    while (common < lo.size() && common < hi.size() && lo[common] == hi[common]) ++common;
    if (common > 0) --common;
    decimal_quotients_.assign(lo.begin(), lo.begin() + static_cast<std::ptrdiff_t>(common));
  }
  if (surd_) {
    // (P + sqrt(D)) / Q with Q | D - P^2.
    mpz_class a = surd_->a, b = surd_->b, c = surd_->c;
    if (b < 0) {
      a = -a;
      b = -b;
      c = -c;
    }
    sP_ = a;
    sD_ = b * b * surd_->d;
    sQ_ = c;
    mpz_class diff = sD_ - sP_ * sP_;
    if (diff % sQ_ != 0) {
      mpz_class aq = abs(sQ_);
      sP_ *= aq;
      sD_ *= sQ_ * sQ_;
      sQ_ *= aq;
    }
    mpz_sqrt(sIsqrt_.get_mpz_t(), sD_.get_mpz_t());
  }
}

std::optional<std::size_t> Alpha::certified_depth() const {
  if (!is_decimal()) return std::nullopt;
  if (decimal_quotients_.empty()) return std::nullopt;
  return decimal_quotients_.size() - 1;
}

mpz_class Alpha::next_quotient(std::size_t n) const {
  if (surd_) {
    mpz_class a;
    if (sQ_ > 0) {
      mpz_fdiv_q(a.get_mpz_t(), mpz_class(sP_ + sIsqrt_).get_mpz_t(), sQ_.get_mpz_t());
    } else {
      mpz_class neg = -sQ_;
      mpz_fdiv_q(a.get_mpz_t(), mpz_class(sP_ + sIsqrt_).get_mpz_t(), neg.get_mpz_t());
      a = -(a + 1);
    }
    mpz_class P = a * sQ_ - sP_;
    mpz_class Q = (sD_ - P * P) / sQ_;
    sP_ = P;
    sQ_ = Q;
    if (auto* cf = std::get_if<PeriodicCF>(&spec_)) {
      // The spec's own quotients are authoritative; the surd path is a cross-check.
      const auto& pre = cf->preperiod;
      return n < pre.size() ? pre[n] : cf->period[(n - pre.size()) % cf->period.size()];
    }
    return a;
  }
  if (auto* r = std::get_if<RuleCF>(&spec_)) {
    RuleParams params = check_rule(*r);
    return rule_quotient(*r, params, n, q_);
  }
  // Decimal literal.
  if (n >= decimal_quotients_.size())
    throw Error(ErrorCode::PrecisionExhausted,
                "decimal literal " + str() + " certifies only " + std::to_string(decimal_quotients_.size()) +
                    " partial quotients");
  return decimal_quotients_[n];
}

void Alpha::extend_to(std::size_t n) const {
  while (a_.size() <= n) {
    std::size_t i = a_.size();
    mpz_class ai = next_quotient(i);
    if (i > 0 && ai < 1) throw Error(ErrorCode::RuleFailure, "generated a_n < 1");
    mpz_class pm1 = i == 0 ? mpz_class(1) : p_[i - 1];
    mpz_class qm1 = i == 0 ? mpz_class(0) : q_[i - 1];
    mpz_class pm2 = i == 0 ? mpz_class(0) : (i == 1 ? mpz_class(1) : p_[i - 2]);
    mpz_class qm2 = i == 0 ? mpz_class(1) : (i == 1 ? mpz_class(0) : q_[i - 2]);
    mpz_class pi = ai * pm1 + pm2;
    mpz_class qi = ai * qm1 + qm2;
    if (bitlen(qi) > q_bit_budget_)
      throw Error(ErrorCode::Overflow, "q_" + std::to_string(i) + " exceeds the " + std::to_string(q_bit_budget_) +
                                           "-bit budget; depth reached " + std::to_string(i == 0 ? 0 : i - 1));
    a_.push_back(ai);
    p_.push_back(pi);
    q_.push_back(qi);
  }
}

mpz_class Alpha::quotient(std::size_t n) const {
  std::lock_guard<std::mutex> lock(mu_);
  extend_to(n);
  return a_[n];
}

mpz_class Alpha::p(std::size_t n) const {
  std::lock_guard<std::mutex> lock(mu_);
  extend_to(n);
  return p_[n];
}

mpz_class Alpha::q(std::size_t n) const {
  std::lock_guard<std::mutex> lock(mu_);
  extend_to(n);
  return q_[n];
}

CertifiedReal Alpha::eval(long bits) const {
  if (bits < 1) bits = 1;
  if (is_decimal()) {
    if (decimal_radius_ > pow2_neg(bits))
      throw Error(ErrorCode::PrecisionExhausted,
                  "decimal literal " + str() + " cannot be evaluated to " + std::to_string(bits) + " bits");
    return CertifiedReal(decimal_center_, decimal_radius_);
  }
  if (surd_) {
    const QuadraticSurd& s = *surd_;
    unsigned long k = static_cast<unsigned long>(bits) + bitlen(s.b) + 4;
    mpz_class scaled = s.d;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * k);
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), scaled.get_mpz_t());
    // sqrt(d) in [r, r+1] / 2^k.
    mpq_class lo(r), hi(r + 1);
    mpz_mul_2exp(lo.get_den_mpz_t(), lo.get_den_mpz_t(), k);
    mpz_mul_2exp(hi.get_den_mpz_t(), hi.get_den_mpz_t(), k);
    lo.canonicalize();
    hi.canonicalize();
    CertifiedReal root = CertifiedReal::from_bounds(lo, hi);
    CertifiedReal v = (CertifiedReal(mpq_class(s.a)) + CertifiedReal(mpq_class(s.b)) * root).divided(mpq_class(s.c));
    return v.rounded(bits + 2);
  }
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t n = 0;
  for (;; ++n) {
    extend_to(n + 1);
    if (static_cast<long>(bitlen(q_[n]) + bitlen(q_[n + 1])) >= bits + 2) break;
  }
  // Dyadic outer bounds of the bracket, computed with integer division only.
  auto scale = static_cast<mp_bitcnt_t>(bits + 2);
  mpz_class x = p_[n], y = p_[n + 1];
  mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), scale);
  mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), scale);
  mpz_class fx, cx, fy, cy;
  mpz_fdiv_q(fx.get_mpz_t(), x.get_mpz_t(), q_[n].get_mpz_t());
  mpz_cdiv_q(cx.get_mpz_t(), x.get_mpz_t(), q_[n].get_mpz_t());
  mpz_fdiv_q(fy.get_mpz_t(), y.get_mpz_t(), q_[n + 1].get_mpz_t());
  mpz_cdiv_q(cy.get_mpz_t(), y.get_mpz_t(), q_[n + 1].get_mpz_t());
  mpq_class lo(fx < fy ? fx : fy), hi(cx > cy ? cx : cy);
  mpz_mul_2exp(lo.get_den_mpz_t(), lo.get_den_mpz_t(), scale);
  mpz_mul_2exp(hi.get_den_mpz_t(), hi.get_den_mpz_t(), scale);
  lo.canonicalize();
  hi.canonicalize();
  return CertifiedReal::from_bounds(lo, hi);
}

CertifiedReal Alpha::eval_form(const mpq_class& c0, const mpq_class& c1, long bits) const {
  if (sgn(c1) == 0) return CertifiedReal(c0);
  mpz_class mag = abs(c1.get_num()) / c1.get_den() + 1;
  long extra = static_cast<long>(bitlen(mag)) + 2;
  CertifiedReal a = eval(bits + extra);
  return (CertifiedReal(c0) + CertifiedReal(c1) * a).rounded(bits + 2);
}

int Alpha::sign_of(const mpq_class& c0, const mpq_class& c1) const {
  if (sgn(c1) == 0) return sgn(c0);
  if (surd_) {
    const QuadraticSurd& s = *surd_;
    mpq_class X = c0 * mpq_class(s.c) + c1 * mpq_class(s.a);
    mpq_class Y = c1 * mpq_class(s.b);
    mpz_class m;
    mpz_lcm(m.get_mpz_t(), X.get_den_mpz_t(), Y.get_den_mpz_t());
    mpz_class A = X.get_num() * (m / X.get_den());
    mpz_class B = Y.get_num() * (m / Y.get_den());
    return surd_sign(A, B, s.d) * sgn(s.c);
  }
  if (is_decimal()) {
    CertifiedReal v = CertifiedReal(c0) + CertifiedReal(c1) * CertifiedReal(decimal_center_, decimal_radius_);
    if (auto s = v.sign()) return *s;
    throw Error(ErrorCode::PrecisionExhausted, "decimal literal " + str() + " too short to decide a sign");
  }
  // Consecutive convergents bracket alpha strictly, so c0 + c1*alpha lies
  // strictly between the two endpoint values.
  // Scaled by c0.den * c1.den > 0: sign(N0*q + N1*p) is the sign at p/q.
  mpz_class N0 = c0.get_num() * c1.get_den(), N1 = c1.get_num() * c0.get_den();
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t n = 1;
  for (;;) {
    extend_to(n + 1);
    int s1 = sgn(mpz_class(N0 * q_[n] + N1 * p_[n]));
    int s2 = sgn(mpz_class(N0 * q_[n + 1] + N1 * p_[n + 1]));
    if (s1 >= 0 && s2 >= 0) return 1;
    if (s1 <= 0 && s2 <= 0) return -1;
    ++n;
  }
}

AlphaPtr make_alpha(std::string_view spec_text) { return std::make_shared<const Alpha>(parse_alpha_spec(spec_text)); }
AlphaPtr make_alpha(AlphaSpec spec) { return std::make_shared<const Alpha>(std::move(spec)); }

}  // namespace osc
