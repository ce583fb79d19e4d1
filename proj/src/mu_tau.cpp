#include "osc/mu_tau.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include "osc/error.hpp"
#include "osc/fast_orbit.hpp"
#include "osc/json_io.hpp"

namespace osc {

namespace {

using u128 = FastOrbit::u128;

struct Best {
  bool has = false;
  Term term;
  double approx = 0;
};

// Does t strictly improve the current best of its sign class?
bool improves(const Orbit& o, const Term& t, int sign, const Best& b) {
  if (!b.has) return true;
  int c = o.compare(t, b.term);
  return sign > 0 ? c < 0 : c > 0;
}

ScanEntry make_entry(const Orbit& o, const Term& t, int sign) {
  return ScanEntry{t.base.get_num(), o.eval_rel(t, 96), sign};
}

std::vector<ScanEntry> scan_chunk(const Orbit& o, const FastOrbit& fo, const Exponent& beta, std::uint64_t lo,
                                  std::uint64_t hi) {
  std::vector<ScanEntry> out;
  Best best[2];
  const double b = beta.to_double();
  const bool fast_ok = hi <= fo.safe_limit();
  u128 x = fo.raw(lo);
  for (std::uint64_t k = lo; k <= hi; ++k, x += fo.step()) {
    const double kb = std::pow(static_cast<double>(k), b);
    int s = 2;
    double mag = 0, err = 0;
    if (fast_ok) {
      u128 e = fo.error_units(k);
      s = FastOrbit::certain_sign(x, e);
      mag = std::fabs(FastOrbit::to_double(x));
      err = static_cast<double>(e) * 0x1p-128;
    }
    if (s == 2) {
      LinForm f = o.frac_form(mpz_class(static_cast<unsigned long>(k)));
      s = o.sign(f);
      if (s == 0) continue;
      mag = std::fabs(o.approx(Term{1, beta, f}));
      err = 0x1p-60;
    }
    Best& bs = best[s > 0 ? 1 : 0];
    double v = kb * mag, verr = kb * err + v * 1e-12;
    if (bs.has && v - verr >= bs.approx * (1 + 1e-9)) continue;
    Term t = o.w_term(mpz_class(static_cast<unsigned long>(k)), beta);
    if (!improves(o, t, s, bs)) continue;
    ScanEntry entry = make_entry(o, t, s);
    bs.has = true;
    bs.term = t;
    bs.approx = std::fabs(entry.value.approx());
    out.push_back(std::move(entry));
  }
  return out;
}

mpq_class half() { return mpq_class(1, 2); }

CertifiedReal ball_min(const CertifiedReal& a, const CertifiedReal& b) {
  return CertifiedReal::from_bounds(std::min(a.lower(), b.lower()), std::min(a.upper(), b.upper()));
}
CertifiedReal ball_max(const CertifiedReal& a, const CertifiedReal& b) {
  return CertifiedReal::from_bounds(std::max(a.lower(), b.lower()), std::max(a.upper(), b.upper()));
}

// 0^x = 0 for x > 0.
CertifiedReal int_pow(const mpz_class& base, const Exponent& e, long bits = 128) {
  if (sgn(base) == 0) return CertifiedReal(0L);
  return CertifiedReal(base).pow(e, bits);
}

mpz_class ceil_q(const mpq_class& x) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}
mpz_class floor_q(const mpq_class& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

// (|h| / |eps|)^(1/(beta+1)) as a rational approximation.
mpq_class root_ratio(const mpq_class& h, const CertifiedReal& eps, const Exponent& beta) {
  mpq_class r = abs(h) / abs(eps.center());
  Exponent inv(1 / (beta.value() + 1));
  return CertifiedReal(r).pow(inv, 64).center();
}

bool within_tol(const Orbit& o, const Term& w, const mpq_class& h, const mpq_class& tol) {
  Term hi{1, w.beta, LinForm::constant(h + tol)};
  Term lo{1, w.beta, LinForm::constant(h - tol)};
  return o.compare(w, hi) <= 0 && o.compare(w, lo) >= 0;
}

}  // namespace

std::optional<CertifiedReal> ScanRecord::min_upto(int sign, std::uint64_t bound) const {
  std::optional<CertifiedReal> out;
  for (const auto& e : entries) {
    if (e.k > static_cast<unsigned long>(bound)) break;
    if (e.sign == sign) out = e.value.abs();
  }
  return out;
}

ScanRecord scan_mu(const Orbit& o, const Exponent& beta, std::uint64_t N, unsigned threads) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "scan bound N must be >= 1");
  FastOrbit fo(o);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(N, 256))));
  std::vector<std::vector<ScanEntry>> parts(threads);
  std::vector<std::exception_ptr> errors(threads);
  auto bounds = [&](unsigned i) {
    std::uint64_t lo = 1 + N / threads * i + std::min<std::uint64_t>(i, N % threads);
    std::uint64_t len = N / threads + (i < N % threads ? 1 : 0);
    return std::make_pair(lo, lo + len - 1);
  };
  auto work = [&](unsigned i) {
    try {
      auto [lo, hi] = bounds(i);
      parts[i] = scan_chunk(o, fo, beta, lo, hi);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work, i);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ScanRecord rec;
  rec.N = N;
  rec.beta = beta;
  rec.alpha = o.alpha().str();
  rec.rho = o.rho().str();
  // A global improvement is always a local one, so filtering the chunk lists is exact.
  Best best[2];
  for (auto& part : parts) {
    for (auto& e : part) {
      Best& bs = best[e.sign > 0 ? 1 : 0];
      Term t = o.w_term(e.k, beta);
      if (!improves(o, t, e.sign, bs)) continue;
      bs.has = true;
      bs.term = t;
      rec.entries.push_back(std::move(e));
    }
  }
  for (const auto& e : rec.entries) {
    if (e.sign > 0) {
      rec.final_min_plus = e.value.abs();
      rec.k_plus = e.k;
    } else {
      rec.final_min_minus = e.value.abs();
      rec.k_minus = e.k;
    }
  }
  return rec;
}

const char* verdict_hint_name(VerdictHint v) {
  switch (v) {
    case VerdictHint::EvidenceZero:
      return "evidence-zero";
    case VerdictHint::BoundedBelow:
      return "bounded-below";
    case VerdictHint::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

MuEstimate estimate_mu(const ScanRecord& rec, double tol) {
  MuEstimate est;
  est.beta = rec.beta;
  est.rho = rec.rho;
  est.N = rec.N;
  est.tol = tol;
  est.mu_plus_upper = rec.final_min_plus;
  est.mu_minus_upper = rec.final_min_minus;
  auto hint = [&](int sign, const std::optional<CertifiedReal>& up) {
    if (!up) return VerdictHint::Inconclusive;
    if (up->upper() <= mpq_class(tol)) return VerdictHint::EvidenceZero;
    auto earlier = rec.min_upto(sign, rec.N / 10);
    if (earlier && up->approx() >= 0.5 * earlier->approx()) return VerdictHint::BoundedBelow;
    return VerdictHint::Inconclusive;
  };
  est.hint_plus = hint(1, est.mu_plus_upper);
  est.hint_minus = hint(-1, est.mu_minus_upper);
  return est;
}

std::optional<ConvergentMin> convergent_mu(const ConvergentTable& t, const Exponent& beta, Parity parity,
                                           const mpz_class& q_divisor, std::size_t upto, std::size_t from) {
  if (upto > t.depth()) throw Error(ErrorCode::IndexOutOfRange, "convergent_mu beyond table depth");
  if (q_divisor < 1) throw Error(ErrorCode::InvalidArgument, "q_divisor must be positive");
  Orbit o(t.alpha, Rho::rational(0));
  std::optional<ConvergentMin> out;
  Term best;
  for (std::size_t n = from; n <= upto; ++n) {
    if ((n % 2 == 0) != (parity == Parity::Even)) continue;
    if (n == 0 && (t.depth() < 1 || t.a[1] < 2)) continue;
    if (t.q[n] % q_divisor != 0) continue;
    Term term{mpq_class(t.q[n]), beta, t.theta_form(n)};
    if (!out || o.compare(term, best) < 0) {
      best = term;
      out = ConvergentMin{o.eval_rel(term, 96), n};
    }
  }
  return out;
}

Lemma2Report check_lemma2_report(const ConvergentTable& t, const Exponent& beta, std::size_t N, unsigned threads) {
  if (beta.value() < 1) throw Error(ErrorCode::InvalidArgument, "the convergent reduction needs beta >= 1");
  if (N > t.depth()) throw Error(ErrorCode::IndexOutOfRange, "N beyond table depth");
  if (!t.q[N].fits_ulong_p()) throw Error(ErrorCode::Overflow, "q_N too large for an exhaustive scan");
  Orbit o(t.alpha, Rho::rational(0));
  ScanRecord rec = scan_mu(o, beta, t.q[N].get_ui(), threads);
  Lemma2Report r;
  r.scan_min_plus = rec.final_min_plus;
  r.scan_min_minus = rec.final_min_minus;
  r.scan_k_plus = rec.k_plus;
  r.scan_k_minus = rec.k_minus;
  auto cp = convergent_mu(t, beta, Parity::Even, 1, N);
  auto cm = convergent_mu(t, beta, Parity::Odd, 1, N);
  if (cp) {
    r.conv_min_plus = cp->value;
    r.conv_k_plus = t.q[cp->index];
  }
  if (cm) {
    r.conv_min_minus = cm->value;
    r.conv_k_minus = t.q[cm->index];
  }
  r.holds = cp && cm && rec.final_min_plus && rec.final_min_minus && r.scan_k_plus == r.conv_k_plus &&
            r.scan_k_minus == r.conv_k_minus;
  return r;
}

SpectrumReport small_norm_spectrum(const ConvergentTable& t, std::size_t n) {
  if (n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "small_norm_spectrum needs an even index");
  if (n + 2 > t.depth()) throw Error(ErrorCode::IndexOutOfRange, "table depth must be >= n + 2");
  if (!t.q[n + 2].fits_ulong_p()) throw Error(ErrorCode::Overflow, "q_{n+2} too large for an exhaustive scan");
  Orbit o(t.alpha, Rho::rational(0));
  FastOrbit fo(o);
  LinForm theta = t.theta_form(n);
  const double th = o.eval(theta, 64).approx();
  const std::uint64_t bound = t.q[n + 2].get_ui();
  SpectrumReport r;
  u128 x = fo.raw(1);
  for (std::uint64_t k = 1; k < bound; ++k, x += fo.step()) {
    double err = static_cast<double>(fo.error_units(k)) * 0x1p-128;
    double d = std::fabs(FastOrbit::to_double(x));
    if (d > th * (1 + 1e-9) + err + 1e-300 && bound <= fo.safe_limit()) continue;
    mpz_class kk(static_cast<unsigned long>(k));
    LinForm f = o.frac_form(kk);
    LinForm dist = o.dist_form(f);
    if (o.sign(theta - dist) < 0) continue;
    r.found.insert(kk);
    if (o.sign(f) > 0) r.positive.insert(kk);
  }
  const mpz_class& a = t.a[n + 2];
  for (mpz_class l = 0; l < a; ++l) r.predicted_pos.insert(t.q[n] + l * t.q[n + 1]);
  r.predicted = r.predicted_pos;
  for (mpz_class l = 1; l <= a; ++l) r.predicted.insert(l * t.q[n + 1]);
  r.contained = std::includes(r.predicted.begin(), r.predicted.end(), r.found.begin(), r.found.end());
  r.positive_exact = r.positive == r.predicted_pos;
  return r;
}

TauEstimate tau_estimate(const ConvergentTable& t, const Exponent& beta, const OstrowskiDigits& d,
                         std::size_t upto) {
  if (upto + 1 > t.depth()) throw Error(ErrorCode::IndexOutOfRange, "tau_estimate needs table depth >= N + 1");
  if (upto > d.depth()) throw Error(ErrorCode::IndexOutOfRange, "digits shallower than N");
  Orbit o(t.alpha, Rho::rational(0));
  Exponent half_exp((beta.value() + 1) / 2);
  TauEstimate out;
  for (std::size_t n = 0; n <= upto; ++n) {
    if (n == 0 && t.a[1] < 2) continue;
    const mpz_class& e = d.e[n];
    CertifiedReal f1 = int_pow(e, beta);
    CertifiedReal f2 = int_pow(t.a[n + 1] - e, half_exp);
    CertifiedReal factor = ball_max(CertifiedReal(1L), ball_min(f1, f2));
    CertifiedReal base = o.eval_rel(Term{mpq_class(t.q[n]), beta, t.theta_form(n)}, 96);
    CertifiedReal v = factor * base;
    auto& slot = n % 2 == 0 ? out.tau_plus_upper : out.tau_minus_upper;
    auto& idx = n % 2 == 0 ? out.index_plus : out.index_minus;
    if (!slot || v.center() < slot->center()) idx = n;
    slot = slot ? ball_min(*slot, v) : v;
  }
  std::size_t last = 0;
  for (std::size_t n = 0; n < d.e.size(); ++n)
    if (sgn(d.e[n]) != 0) last = n;
  out.terminating = last < upto;
  return out;
}

Witness rational_witness(const ConvergentTable& t, const Exponent& beta, const mpz_class& p, const mpz_class& q,
                         const mpq_class& h, const mpq_class& tol, std::uint64_t scan_bound) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "q must be positive");
  if (sgn(h) == 0 || sgn(tol) <= 0) throw Error(ErrorCode::InvalidArgument, "need h != 0 and tol > 0");
  mpq_class rho(p, q);
  rho.canonicalize();
  Orbit o(t.alpha, Rho::rational(rho));
  ScanRecord rec = scan_mu(o, beta, scan_bound);
  const int s = sgn(h);
  const mpz_class qq = rho.get_den();
  // Candidates for m: scan improvements first, then indices solving
  // m p_n = rho q_n (mod q_n) for q | q_n, whose error m(alpha - p_n/q_n) has sign (-1)^n.
  std::vector<mpz_class> ms;
  for (const auto& entry : rec.entries)
    if (entry.sign == s) ms.push_back(entry.k);
  for (std::size_t n = 1; n <= t.depth(); ++n) {
    if (t.q[n] % qq != 0 || ConvergentTable::parity_sign(n) != s) continue;
    mpz_class inv, m;
    mpz_invert(inv.get_mpz_t(), t.p[n].get_mpz_t(), t.q[n].get_mpz_t());
    m = rho.get_num() * (t.q[n] / qq) * inv;
    mpz_fdiv_r(m.get_mpz_t(), m.get_mpz_t(), t.q[n].get_mpz_t());
    if (m == 0) m = t.q[n];
    if (m > scan_bound) ms.push_back(m);
  }
  for (const auto& m : ms) {
    LinForm delta = o.frac_form(m);
    if (o.sign(delta) != s) continue;
    CertifiedReal eps = o.eval_rel(o.w_term(m, beta), 96);
    // <m alpha - rho>_2 = eps / m^beta; both branches of <m alpha>_2 - <rho>_2 reduce to this.
    mpz_class l = ceil_q((root_ratio(h, eps, beta) - 1) / qq);
    if (l < 0) l = 0;
    mpz_class k = (l * qq + 1) * m;
    LinForm scaled = delta * mpq_class(l * qq + 1);
    if (o.sign(LinForm::constant(half()) - (s > 0 ? scaled : -scaled)) <= 0) continue;
    Term w = o.w_term(k, beta);
    if (!within_tol(o, w, h, tol)) continue;
    return Witness{k, o.eval_rel(w, 96), m, l, "rational-Q"};
  }
  throw Error(ErrorCode::NoWitnessAtScale, "no scanned or convergent-derived m gives a witness within tolerance");
}

Witness real_witness(const ConvergentTable& t, const Exponent& beta, const OstrowskiDigits& d, const mpq_class& h,
                     const mpq_class& tol) {
  if (sgn(h) == 0 || sgn(tol) <= 0) throw Error(ErrorCode::InvalidArgument, "need h != 0 and tol > 0");
  Orbit o(t.alpha, digits_rho(d, t));
  std::vector<mpz_class> K = kappa_seq(d, t);
  const int s = sgn(h);
  const std::size_t top = std::min(d.depth(), t.depth() - 1);
  Exponent half_exp((beta.value() + 1) / 2);
  for (std::size_t m = s > 0 ? 2 : 1; m <= top; m += 2) {
    CertifiedReal eps = o.eval_rel(Term{mpq_class(t.q[m]), beta, t.theta_form(m)}, 96);
    if (!(eps.lower() > 0)) continue;
    const mpz_class& e = d.e[m];
    const mpz_class Kprev = K[m - 1];
    CertifiedReal c1 = ball_max(CertifiedReal(1L), int_pow(e, beta)) * eps;
    CertifiedReal c2 = ball_max(CertifiedReal(1L), int_pow(t.a[m + 1] - e, half_exp)) * eps;
    mpz_class r = floor_q(root_ratio(h, eps, beta));
    struct Family {
      const char* name;
      mpz_class lmin, lmax;
      std::function<mpz_class(const mpz_class&)> index;
    };
    Family fq{"real-Q", 0, 2 * r, [&](const mpz_class& l) { return mpz_class(Kprev + (e + l) * t.q[m]); }};
    Family fp{"real-P", 1, 4 * r, [&](const mpz_class& l) { return mpz_class(Kprev + l * t.q[m] - t.q[m - 1]); }};
    std::vector<Family*> order = c1.center() <= c2.center() ? std::vector<Family*>{&fq, &fp}
                                                             : std::vector<Family*>{&fp, &fq};
    for (Family* f : order) {
      if (f->lmax < f->lmin) continue;
      auto value = [&](const mpz_class& l) {
        mpz_class k = f->index(l);
        if (k < 1) return -1e300;
        return s * o.approx(o.w_term(k, beta));
      };
      const double target = std::fabs(h.get_d());
      // Smallest l with s*w >= |h|; the predicate is monotone while no wrap occurs.
      mpz_class lo = f->lmin, hi = f->lmax;
      if (value(hi) >= target) {
        while (lo < hi) {
          mpz_class mid = (lo + hi) / 2;
          if (value(mid) >= target)
            hi = mid;
          else
            lo = mid + 1;
        }
      } else {
        lo = hi;
      }
      std::vector<mpz_class> cands{lo};
      if (lo > f->lmin) cands.push_back(lo - 1);
      std::sort(cands.begin(), cands.end(), [&](const mpz_class& a, const mpz_class& b) {
        return std::fabs(value(a) - target) < std::fabs(value(b) - target);
      });
      for (const auto& l : cands) {
        mpz_class k = f->index(l);
        if (k < 1) continue;
        Term w = o.w_term(k, beta);
        if (within_tol(o, w, h, tol)) return Witness{k, o.eval_rel(w, 96), mpz_class(static_cast<unsigned long>(m)), l, f->name};
      }
    }
  }
  throw Error(ErrorCode::NoWitnessAtScale, "no convergent level within depth yields a witness within tolerance");
}

std::string scan_csv(const ScanRecord& rec, int digits) {
  std::ostringstream os;
  os << "k,value,radius,sign\n";
  for (const auto& e : rec.entries)
    os << e.k << ',' << e.value.scientific(digits) << ',' << e.value.radius_string() << ',' << e.sign << '\n';
  return os.str();
}

std::string scan_json(const ScanRecord& rec, int digits) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "scan";
  j["alpha"] = rec.alpha;
  j["beta"] = rec.beta.str();
  j["rho"] = rec.rho;
  j["N"] = rec.N;
  Json arr = Json::array();
  for (const auto& e : rec.entries) {
    Json x;
    x["k"] = int_json(e.k);
    x["sign"] = e.sign;
    x["value"] = ball_json(e.value, digits);
    arr.push_back(x);
  }
  j["entries"] = arr;
  j["final_min_plus"] = ball_json(rec.final_min_plus, digits);
  j["k_plus"] = rec.final_min_plus ? int_json(rec.k_plus) : Json(nullptr);
  j["final_min_minus"] = ball_json(rec.final_min_minus, digits);
  j["k_minus"] = rec.final_min_minus ? int_json(rec.k_minus) : Json(nullptr);
  return j.dump(2);
}

std::string mu_json(const MuEstimate& est, int digits) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "mu";
  j["beta"] = est.beta.str();
  j["rho"] = est.rho;
  j["N"] = est.N;
  j["tol"] = est.tol;
  j["mu_plus_upper"] = ball_json(est.mu_plus_upper, digits);
  j["mu_minus_upper"] = ball_json(est.mu_minus_upper, digits);
  j["verdict_plus"] = verdict_hint_name(est.hint_plus);
  j["verdict_minus"] = verdict_hint_name(est.hint_minus);
  return j.dump(2);
}

}  // namespace osc
