#include "osc/constructors.hpp"

#include <algorithm>

#include <mpfr.h>

#include "osc/error.hpp"
#include "osc/json_io.hpp"

namespace osc {

const char* mu_class_name(MuClass c) {
  switch (c) {
    case MuClass::Zero: return "zero";
    case MuClass::Infinite: return "infinite";
    case MuClass::Bounded: return "bounded";
  }
  return "bounded";
}

MuEvidence classify_mu(const ConvergentTable& t, const Exponent& beta, Parity parity, double tol) {
  MuEvidence ev;
  const std::size_t D = t.depth();
  if (D < 4) return ev;
  auto early = convergent_mu(t, beta, parity, 1, D / 2 - 1, std::max<std::size_t>(1, D / 4));
  auto late = convergent_mu(t, beta, parity, 1, D, (3 * D) / 4);
  if (early) ev.early = early->value;
  if (late) ev.late = late->value;
  if (!early || !late) return ev;
  const double e = early->value.approx(), l = late->value.approx();
  if (late->value.upper() <= tol || l < 0.75 * e)
    ev.cls = MuClass::Zero;
  else if (l > 2 * e && l >= 1)
    ev.cls = MuClass::Infinite;
  return ev;
}

const char* rho_case_name(RhoCase c) {
  switch (c) {
    case RhoCase::Auto: return "auto";
    case RhoCase::Case1: return "case1";
    case RhoCase::Case2: return "case2";
    case RhoCase::Case3: return "case3";
  }
  return "auto";
}

RhoCase parse_rho_case(std::string_view text) {
  if (text == "auto") return RhoCase::Auto;
  if (text == "case1") return RhoCase::Case1;
  if (text == "case2") return RhoCase::Case2;
  if (text == "case3") return RhoCase::Case3;
  throw Error(ErrorCode::InvalidArgument, "case must be auto, case1, case2 or case3");
}

bool RhoBuildCertificate::valid() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.ok; });
}

namespace {

LinForm abs_theta(const ConvergentTable& t, std::size_t n) { return t.theta_form(n); }

// base^beta * |form| <= bound, decided exactly.
bool scaled_le(const Orbit& o, const mpz_class& base, const Exponent& beta, const LinForm& form,
               const mpq_class& bound) {
  return o.compare(Term{mpq_class(base), beta, form}, Term{1, beta, LinForm::constant(bound)}) <= 0;
}

mpz_class ceil_ratio(const Orbit& o, const LinForm& num, const LinForm& den, long bits) {
  CertifiedReal a = o.eval(num, bits), b = o.eval(den, bits);
  mpq_class r = a.center() / b.center();
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return c;
}

long bits_for(const ConvergentTable& t, std::size_t n) {
  std::size_t hi = std::min(n + 1, t.depth());
  return static_cast<long>(mpz_sizeinbase(t.q[hi].get_mpz_t(), 2) * 2 + 96);
}

// Tail digits e_{m+1}, ... for sum_{n>m} e_n <q_n alpha>_2 ~ T, stopping at the
// first n with K^beta ||q_n alpha|| <= stop. Returns the last index used.
std::size_t tail_digits(const Orbit& o, const ConvergentTable& t, OstrowskiDigits& d, std::size_t m,
                        const mpq_class& T, const mpz_class& K, const Exponent& beta, const mpq_class& stop) {
  LinForm r = LinForm::constant(T);
  for (std::size_t n = m + 1; n + 1 <= t.depth(); ++n) {
    const int s = ConvergentTable::parity_sign(n);
    const LinForm th = abs_theta(t, n), th1 = abs_theta(t, n + 1);
    const LinForm u = r * mpq_class(s);
    const long bits = bits_for(t, n);
    mpz_class e = ceil_ratio(o, u - th1, th, bits);
    // need -|th_n| <= u - e|th_n| <= |th_{n+1}|
    while (o.sign(u - th * mpq_class(e) - th1) > 0) ++e;
    while (e > 0 && o.sign(u - th * mpq_class(e - 1) - th1) <= 0) --e;
    if (e < 0) e = 0;
    mpz_class cap = t.a[n + 1];
    if (d.digit(n - 1) > 0) cap -= 1;
    if (e > cap) e = cap;
    if (d.e.size() <= n) d.e.resize(n + 1, 0);
    d.e[n] = e;
    r -= t.err_form(n) * mpq_class(e);
    if (scaled_le(o, K, beta, th, stop)) return n;
  }
  throw Error(ErrorCode::DepthExhausted, "table too shallow to finish the tail digits");
}

// -b / K^beta to relative accuracy 2^-(80 + log2(j |b|)).
mpq_class tail_target(const Orbit& o, const mpq_class& b, const mpz_class& K, const Exponent& beta, std::size_t j) {
  if (sgn(b) == 0) return 0;
  if (beta.is_integer()) {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), K.get_mpz_t(), beta.integer());
    return -b / mpq_class(p);
  }
  mpq_class jb = abs(b) * static_cast<unsigned long>(j);
  long extra = static_cast<long>(mpz_sizeinbase(jb.get_num_mpz_t(), 2)) -
               static_cast<long>(mpz_sizeinbase(jb.get_den_mpz_t(), 2));
  CertifiedReal kb = o.eval_rel(Term{mpq_class(K), beta, LinForm::constant(1)}, 80 + std::max(0L, extra));
  return -b / kb.center();
}

RhoTargetEntry certify(const Orbit& o, const Exponent& beta, std::size_t j, const mpq_class& b, std::size_t m,
                       const mpz_class& l, const mpz_class& k, std::string family) {
  RhoTargetEntry e;
  e.j = j;
  e.target = b;
  e.m = m;
  e.l = l;
  e.k = k;
  e.family = std::move(family);
  const mpq_class bound(1, static_cast<unsigned long>(j));
  Term w = o.w_term(k, beta);
  e.w = o.eval_rel(w, 96);
  e.residual = (e.w - CertifiedReal(b)).abs();
  if (e.residual.upper() <= bound) {
    e.ok = true;
  } else {
    // |w - b| <= 1/j  <=>  b - 1/j <= w <= b + 1/j, decided exactly
    auto cmp = [&](const mpq_class& c) {
      return o.compare(w, Term{1, beta, LinForm::constant(c)});
    };
    e.ok = cmp(b - bound) >= 0 && cmp(b + bound) <= 0;
  }
  return e;
}

// Smallest e in [1, cap] with (K_prev + e q_m)^beta ||q_m alpha|| >= 5|b|.
std::optional<mpz_class> level_digit(const Orbit& o, const ConvergentTable& t, std::size_t m, const mpz_class& Kprev,
                                     const Exponent& beta, const mpq_class& b, const mpz_class& cap) {
  if (cap < 1) return std::nullopt;
  const LinForm th = abs_theta(t, m);
  const mpq_class need = 5 * abs(b);
  auto ok = [&](const mpz_class& e) {
    return o.compare(Term{mpq_class(Kprev + e * t.q[m]), beta, th}, Term{1, beta, LinForm::constant(need)}) >= 0;
  };
  mpz_class e = 1;
  if (sgn(need) > 0) {
    const unsigned long prec = mpz_sizeinbase(cap.get_mpz_t(), 2) + mpz_sizeinbase(t.q[m].get_mpz_t(), 2) + 64;
    CertifiedReal v = o.eval_rel(Term{1, beta, th}, static_cast<long>(prec));
    mpfr_t x, y;
    mpfr_inits2(static_cast<mpfr_prec_t>(prec), x, y, static_cast<mpfr_ptr>(nullptr));
    mpq_class ratio = need / v.center();
    mpfr_set_q(x, ratio.get_mpq_t(), MPFR_RNDU);
    mpq_class inv = 1 / beta.value();
    mpfr_set_q(y, inv.get_mpq_t(), MPFR_RNDU);
    mpfr_pow(x, x, y, MPFR_RNDU);
    mpfr_sub_z(x, x, Kprev.get_mpz_t(), MPFR_RNDU);
    mpfr_div_z(x, x, t.q[m].get_mpz_t(), MPFR_RNDU);
    mpfr_ceil(x, x);
    if (mpfr_cmp_ui(x, 1) > 0) {
      mpfr_get_z(e.get_mpz_t(), x, MPFR_RNDU);
      if (e > cap) e = cap;
    }
    mpfr_clears(x, y, static_cast<mpfr_ptr>(nullptr));
  }
  // bracket then bisect: ok is monotone in e
  if (!ok(e)) {
    if (!ok(cap)) return std::nullopt;
    mpz_class lo = e, hi = cap, step = 1;
    while (lo + step < hi && !ok(lo + step)) {
      lo += step;
      step *= 2;
    }
    if (lo + step < hi) hi = lo + step;
    while (hi - lo > 1) {
      mpz_class mid = (lo + hi) / 2;
      (ok(mid) ? hi : lo) = mid;
    }
    return hi;
  }
  mpz_class hi = e, lo = e, step = 1;
  while (lo > 1 && ok(lo)) {
    hi = lo;
    lo = lo > step ? mpz_class(lo - step) : mpz_class(1);
    step *= 2;
  }
  if (ok(lo)) return lo;
  while (hi - lo > 1) {
    mpz_class mid = (lo + hi) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Targets realised at K_{m(j)}. Cases 2 and 3 take e_{m(j)} = 1 and need
// q_m^beta ||q_m alpha|| >= 5|b_j|; case 1 scales e_{m(j)} up to meet the same bound.
void build_blocks(const ConvergentTable& t, const Exponent& beta, const std::vector<mpq_class>& targets, RhoCase kind,
                  RhoBuildCertificate& c) {
  const bool case3 = kind == RhoCase::Case3, scaled = kind == RhoCase::Case1;
  OstrowskiDigits& d = c.digits;
  d.alpha = t.alpha->str();
  d.e.assign(1, 0);
  Orbit o0(t.alpha, Rho::rational(0));
  struct Block {
    std::size_t m, end;
    mpz_class K;
  };
  std::vector<Block> blocks;
  for (std::size_t j = 1; j <= targets.size(); ++j) {
    const mpq_class& b = targets[j - 1];
    const bool positive = sgn(b) >= 0;
    const std::size_t start = blocks.empty() ? 1 : blocks.back().end + (case3 ? 2 : 1);
    std::optional<std::size_t> chosen;
    mpz_class digit = 1;
    // case 1: the last tail digit of the previous block may already sit high enough to serve as e_{m(j)}
    if (scaled && !blocks.empty()) {
      const std::size_t m = blocks.back().end;
      if ((m % 2 == 0) == positive && m + 2 <= t.depth() && d.digit(m) > 0) {
        mpz_class K = 0;
        for (std::size_t n = 0; n <= m; ++n) K += d.digit(n) * t.q[n];
        if (o0.compare(Term{mpq_class(K), beta, abs_theta(t, m)}, Term{1, beta, LinForm::constant(5 * abs(b))}) >= 0) {
          chosen = m;
          digit = d.digit(m);
        }
      }
    }
    for (std::size_t m = start; !chosen && m + 2 <= t.depth(); ++m) {
      if ((m % 2 == 0) != positive) continue;
      // digits from m on sum to less than ||q_{m-1} alpha||
      if (!blocks.empty() && !scaled_le(o0, blocks.back().K, beta, abs_theta(t, m - 1), mpq_class(1, 2 * (j - 1))))
        continue;
      if (case3 && !scaled_le(o0, t.q[m - 1], beta, abs_theta(t, m - 1), mpq_class(1, 2 * j))) continue;
      mpz_class cap = t.a[m + 1];
      if (d.digit(m - 1) > 0) cap -= 1;
      mpz_class Kprev = 0;
      for (std::size_t n = 0; n < m; ++n) Kprev += d.digit(n) * t.q[n];
      if (scaled) {
        auto e = level_digit(o0, t, m, Kprev, beta, b, cap);
        if (!e) continue;
        digit = *e;
      } else {
        if (cap < 1) continue;
        // q_m^beta ||q_m alpha|| >= 5 |b|
        if (o0.compare(Term{mpq_class(t.q[m]), beta, abs_theta(t, m)},
                       Term{1, beta, LinForm::constant(5 * abs(b))}) < 0)
          continue;
      }
      chosen = m;
      break;
    }
    if (!chosen) throw Error(ErrorCode::DepthExhausted, "no admissible m(" + std::to_string(j) + ") within the table");
    const std::size_t m = *chosen;
    if (d.e.size() <= m) d.e.resize(m + 1, 0);
    d.e[m] = digit;
    mpz_class K = 0;
    for (std::size_t n = 0; n <= m; ++n) K += d.e[n] * t.q[n];
    const mpq_class T = tail_target(o0, b, K, beta, j);
    const std::size_t end = tail_digits(o0, t, d, m, T, K, beta, mpq_class(1, 4 * j));
    blocks.push_back(Block{m, end, K});
  }
  Orbit o(t.alpha, digits_rho(d, t));
  for (std::size_t j = 1; j <= targets.size(); ++j) {
    const Block& B = blocks[j - 1];
    c.entries.push_back(certify(o, beta, j, targets[j - 1], B.m, mpz_class(static_cast<unsigned long>(B.end - B.m)),
                                B.K, "K_m"));
  }
}

}  // namespace

RhoBuildCertificate build_rho(const ConvergentTable& t, const Exponent& beta, const std::vector<mpq_class>& targets,
                              RhoCase hint, double tol) {
  if (targets.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one target");
  RhoBuildCertificate c;
  c.beta = beta;
  c.mu_plus = classify_mu(t, beta, Parity::Even, tol);
  c.mu_minus = classify_mu(t, beta, Parity::Odd, tol);
  const MuClass P = c.mu_plus.cls, M = c.mu_minus.cls;
  if (P == MuClass::Bounded || M == MuClass::Bounded)
    throw Error(ErrorCode::HypothesisUnmet, std::string("mu+ evidence ") + mu_class_name(P) + ", mu- evidence " +
                                               mu_class_name(M) + "; need each zero or infinite");
  RhoCase evident = P == MuClass::Zero && M == MuClass::Zero             ? RhoCase::Case1
                    : P == MuClass::Infinite && M == MuClass::Infinite ? RhoCase::Case2
                                                                         : RhoCase::Case3;
  if (hint != RhoCase::Auto && hint != evident)
    throw Error(ErrorCode::HypothesisUnmet, std::string("requested ") + rho_case_name(hint) + " but the evidence gives " +
                                               rho_case_name(evident));
  c.used = evident;
  if (evident == RhoCase::Case3) {
      const bool plus_infinite = P == MuClass::Infinite;
      for (const auto& b : targets)
        if ((plus_infinite && sgn(b) < 0) || (!plus_infinite && sgn(b) > 0))
          throw Error(ErrorCode::InvalidArgument,
                      "case 3 targets must lie on the side where mu is infinite; the other side is dense by tau");
  }
  build_blocks(t, beta, targets, evident, c);
  if (!digits_legal(c.digits, t)) throw Error(ErrorCode::InvalidArgument, "constructed digits are not legal: " +
                                                                           digit_violation(c.digits, t));
  Rho r = digits_rho(c.digits, t);
  c.rho = r.str();
  c.rho_value = Orbit(t.alpha, r).eval(r.form, 128);
  return c;
}

std::string certificate_json(const RhoBuildCertificate& c, int digits) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "rho-certificate";
  j["alpha"] = c.digits.alpha;
  j["beta"] = c.beta.str();
  j["case"] = rho_case_name(c.used);
  auto mu = [&](const MuEvidence& e) {
    Json x;
    x["class"] = mu_class_name(e.cls);
    x["early_min"] = ball_json(e.early, digits);
    x["late_min"] = ball_json(e.late, digits);
    return x;
  };
  j["mu_plus"] = mu(c.mu_plus);
  j["mu_minus"] = mu(c.mu_minus);
  Json entries = Json::array();
  for (const auto& e : c.entries) {
    Json x;
    x["j"] = e.j;
    x["target"] = e.target.get_str();
    x["m"] = e.m;
    x["l"] = int_json(e.l);
    x["k"] = int_json(e.k);
    x["family"] = e.family;
    x["w"] = ball_json(e.w, digits);
    x["residual"] = ball_json(e.residual, digits);
    x["bound"] = "1/" + std::to_string(e.j);
    x["ok"] = e.ok;
    entries.push_back(x);
  }
  j["entries"] = entries;
  Json e = Json::array();
  for (const auto& x : c.digits.e) e.push_back(int_json(x));
  j["digits"] = e;
  j["extendable_by_zeros"] = c.extendable_by_zeros;
  j["rho"] = c.rho;
  j["rho_value"] = ball_json(c.rho_value, digits);
  j["valid"] = c.valid();
  return j.dump(2);
}

namespace {

BuiltAlpha built(std::string spec, std::size_t n_max) {
  BuiltAlpha b;
  b.spec = std::move(spec);
  b.alpha = make_alpha(b.spec);
  for (std::size_t n = 1; n <= n_max; ++n) {
    try {
      b.alpha->q(n);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Overflow) throw;
      return b;
    }
    b.depth_reached = n;
  }
  b.complete = true;
  return b;
}

}  // namespace

BuiltAlpha build_asymmetric_alpha(const Exponent& beta, const mpz_class& C, std::size_t n_max, bool swap) {
  if (beta.value() < 1) throw Error(ErrorCode::InvalidArgument, "beta must be at least 1");
  if (C < 1) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  return built("rule:asym:" + beta.str() + "," + C.get_str() + (swap ? ",swap" : ""), n_max);
}

BuiltAlpha build_liouville_alpha(const Exponent& beta, std::size_t n_max) {
  if (sgn(beta.value()) <= 0) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  return built("rule:liouville:" + beta.str(), n_max);
}

}  // namespace osc
