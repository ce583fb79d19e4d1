#include "osc/bohr_filter.hpp"

#include <algorithm>
#include <cmath>

#include "osc/error.hpp"
#include "osc/fast_orbit.hpp"
#include "osc/json_io.hpp"

namespace osc {

namespace {

using u128 = FastOrbit::u128;
using i128 = FastOrbit::i128;

mpz_class mod(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

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

u128 to_u128(const mpz_class& v) {
  mpz_class hi = v >> 64;
  mpz_class lo = v - (hi << 64);
  return (static_cast<u128>(hi.get_ui()) << 64) | static_cast<u128>(lo.get_ui());
}

u128 magnitude(u128 x) {
  i128 s = static_cast<i128>(x);
  return s < 0 ? static_cast<u128>(-(s + 1)) + 1 : static_cast<u128>(s);
}

const Term unit_term(const LinForm& f) { return Term{1, Exponent(), f}; }

CertifiedReal radius_enclosure(const Orbit& o, const BohrRadius& r) {
  CertifiedReal base = o.eval_rel(unit_term(r.form), 64);
  if (sgn(r.e) == 0) return base;
  CertifiedReal div = CertifiedReal(r.e).pow(r.beta, 64);
  div += CertifiedReal(1);
  base *= div.inverse();
  return base;
}

// dist <= radius, decided exactly.
bool dist_within(const Orbit& o, const LinForm& dist, const BohrRadius& r) {
  if (sgn(r.e) == 0) return o.sign(r.form - dist) >= 0;
  if (r.beta.is_integer()) {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), r.e.get_mpz_t(), r.beta.integer());
    return o.sign(r.form - dist * mpq_class(p + 1)) >= 0;
  }
  // e^beta * dist <= form - dist
  return o.compare(Term{mpq_class(r.e), r.beta, dist}, unit_term(r.form - dist)) <= 0;
}

// Dyadic bound with about 64 significant bits, rounded down (up = false) or up.
mpq_class outward(const mpq_class& x, bool up) {
  if (sgn(x) == 0) return x;
  long e = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 2)) -
           static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 2));
  long s = 64 - e;
  mpz_class num = x.get_num(), den = x.get_den();
  if (s >= 0)
    num <<= s;
  else
    den <<= -s;
  mpz_class r;
  if (up)
    mpz_cdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  else
    mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  mpq_class out(r);
  if (s >= 0)
    mpz_mul_2exp(out.get_den_mpz_t(), out.get_den_mpz_t(), s);
  else
    mpz_mul_2exp(out.get_num_mpz_t(), out.get_num_mpz_t(), -s);
  out.canonicalize();
  return out;
}

CertifiedReal compact(const CertifiedReal& x) {
  return CertifiedReal::from_bounds(outward(x.lower(), false), outward(x.upper(), true));
}

mpq_class upper_eps(const CertifiedReal& enc) {
  mpq_class u = enc.upper();
  return u > mpq_class(1, 2) ? mpq_class(1, 2) : u;
}

void brute_candidates(const Orbit& o, const FastOrbit& fo, std::uint64_t lo, std::uint64_t hi, const mpq_class& eps,
                      const std::function<void(const mpz_class&)>& emit) {
  u128 T = to_u128(floor_q(eps * mpq_class(mpz_class(1) << 128))) + 1 + fo.error_units(hi);
  u128 x = fo.raw(lo);
  for (std::uint64_t k = lo;; ++k, x += fo.step()) {
    if (magnitude(x) <= T) emit(mpz_class(static_cast<unsigned long>(k)));
    if (k == hi) break;
  }
  (void)o;
}

}  // namespace

namespace detail {

void walk_candidates(const Orbit& o, const mpz_class& lo, const mpz_class& hi, mpq_class eps,
                     const std::function<void(const mpz_class&)>& emit) {
  if (sgn(eps) == 0) eps = pow2_neg(64) / mpq_class(hi + 1);
  const Alpha& A = o.alpha();
  mpq_class target = mpq_class(8 * hi) / eps;
  std::size_t J = 1;
  while (mpq_class(A.q(J) * A.q(J + 1)) < target) ++J;
  mpz_class qJ = A.q(J), pJ = A.p(J);
  mpz_class inv = ceil_q(mpq_class(8) / eps);
  long s = static_cast<long>(mpz_sizeinbase(inv.get_mpz_t(), 2)) + 1;
  mpz_class two_s = mpz_class(1) << s;
  CertifiedReal r = o.eval(o.rho().form, s + 2);
  mpz_class u = floor_q(r.center() * mpq_class(two_s) + mpq_class(1, 2));
  mpq_class sigma = r.radius() + abs(r.center() - mpq_class(u, two_s));
  mpq_class eps2 = eps + mpq_class(hi, qJ * A.q(J + 1)) + sigma;
  mpz_class M = qJ << s;
  mpz_class Aa = mod(pJ << s, M);
  mpz_class cp = floor_q(eps2 * mpq_class(M));
  if (2 * cp + 1 >= M) throw Error(ErrorCode::InvalidArgument, "window radius too large for an output-sensitive walk");
  mpz_class b0 = mod(cp - u * qJ, M), c = 2 * cp;
  mpz_class k = lo;
  while (k <= hi) {
    auto y = detail::first_hit(Aa, mod(Aa * k + b0, M), M, c);
    if (!y) break;
    k += *y;
    if (k > hi) break;
    emit(k);
    ++k;
  }
}

std::optional<mpz_class> first_hit(mpz_class a, mpz_class b, const mpz_class& m, const mpz_class& c) {
  if (b <= c) return mpz_class(0);
  a = mod(a, m);
  if (sgn(a) == 0) return std::nullopt;
  if (2 * a > m) return first_hit(m - a, mod(c - b, m), m, c);
  // smallest t >= 1 with (b - t m) mod a <= c
  mpz_class c2 = c < a ? c : mpz_class(a - 1);
  auto t = first_hit(mod(-m, a), mod(b - m, a), a, c2);
  if (!t) return std::nullopt;
  return ceil_q(mpq_class((*t + 1) * m - b, a));
}

}  // namespace detail

void window_candidates(const Orbit& o, const mpz_class& lo_in, const mpz_class& hi, const mpq_class& eps,
                       const std::function<void(const mpz_class&)>& emit) {
  mpz_class lo = lo_in < 1 ? mpz_class(1) : lo_in;
  if (lo > hi) return;
  if (eps >= mpq_class(1, 2)) {
    if (hi - lo > 100000000) throw Error(ErrorCode::InvalidArgument, "half-width window over too long a range");
    for (mpz_class k = lo; k <= hi; ++k) emit(k);
    return;
  }
  if (hi.fits_ulong_p() && hi - lo <= detail::kBruteLimit) {
    FastOrbit fo(o);
    if (hi.get_ui() <= fo.safe_limit()) {
      brute_candidates(o, fo, lo.get_ui(), hi.get_ui(), eps, emit);
      return;
    }
  }
  detail::walk_candidates(o, lo, hi, eps, emit);
}

bool in_window(const Orbit& o, const mpz_class& k, const BohrRadius& eps) {
  return dist_within(o, o.dist_form(o.shifted(k)), eps);
}

BohrWindow bohr_set(const Orbit& o, const mpz_class& N, const BohrRadius& eps, const mpz_class& from) {
  BohrWindow w;
  w.N = N;
  w.eps = compact(radius_enclosure(o, eps));
  if (sgn(N) <= 0) return w;
  window_candidates(o, from, N, upper_eps(w.eps), [&](const mpz_class& k) {
    if (in_window(o, k, eps)) w.members.push_back(k);
  });
  return w;
}

LinForm theta_norm(const Orbit& o, const ConvergentTable& t, std::size_t n) {
  if (n == 0) return o.dist_form(LinForm::alpha_times(1));
  return t.theta_form(n);
}

namespace {

mpz_class kappa_at(const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n) {
  mpz_class K = 0;
  for (std::size_t j = 0; j <= n && j <= d.depth(); ++j) K += d.digit(j) * t.q[j];
  return K;
}

void require_depth(const ConvergentTable& t, const OstrowskiDigits& d, std::size_t n_max) {
  if (d.depth() < n_max || t.depth() < n_max)
    throw Error(ErrorCode::IndexOutOfRange, "digits and table must reach depth " + std::to_string(n_max));
}

}  // namespace

FrakD frak_D(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d, const Exponent& beta,
             std::size_t n_max) {
  require_depth(t, d, n_max);
  FrakD D;
  D.n_max = n_max;
  auto add = [&](const BohrWindow& w, std::size_t n, bool prime) {
    for (const auto& k : w.members)
      if (D.members.insert(k).second) D.provenance[k] = Provenance{n, prime};
  };
  for (std::size_t n = 1; n <= n_max; ++n) {
    add(bohr_set(o, kappa_at(d, t, n), BohrRadius::of(theta_norm(o, t, n))), n, false);
    BohrRadius r{theta_norm(o, t, n - 1), d.digit(n - 1), beta};
    add(bohr_set(o, kappa_at(d, t, n - 1) + t.q[n], r), n, true);
  }
  return D;
}

Covering covering_sets(const ConvergentTable& t, const OstrowskiDigits& d, std::size_t n, CoveringRule rule) {
  if (t.depth() < n + 1) throw Error(ErrorCode::IndexOutOfRange, "covering sets need q_{n+1}");
  Covering c;
  mpz_class K = kappa_at(d, t, n), e = d.digit(n);
  for (int l = 0; l <= 2; ++l) {
    mpz_class k = rule == CoveringRule::Stated ? mpz_class(K + (e - l) * t.q[n]) : mpz_class(K - l * t.q[n]);
    if (k >= 1) c.M.insert(k);
  }
  for (int l = 0; l <= 1; ++l) {
    mpz_class a = K + (l + 1) * t.q[n], b = K + t.q[n + 1] - l * t.q[n];
    if (a >= 1) c.M_prime.insert(a);
    if (b >= 1) c.M_prime.insert(b);
  }
  return c;
}

InclusionReport verify_inclusions(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d,
                                  const Exponent& beta, std::size_t n_max, CoveringRule rule) {
  InclusionReport rep;
  FrakD D = frak_D(o, t, d, beta, n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    mpz_class K = kappa_at(d, t, n);
    if (K >= 1 && !D.members.count(K)) {
      rep.kappa_in_D = false;
      rep.violations.push_back("K_" + std::to_string(n) + " = " + K.get_str() + " not in D");
    }
  }
  std::set<mpz_class> U;
  for (std::size_t n = 0; n <= n_max + 1 && n + 1 <= t.depth(); ++n) {
    auto c = covering_sets(t, d, n, rule);
    U.insert(c.M.begin(), c.M.end());
    U.insert(c.M_prime.begin(), c.M_prime.end());
  }
  for (const auto& k : D.members)
    if (!U.count(k)) {
      rep.D_covered = false;
      const auto& p = D.provenance.at(k);
      rep.violations.push_back("k = " + k.get_str() + " from " + (p.prime ? "N'" : "N") + "(" + std::to_string(p.n) +
                               ") not covered");
    }
  std::size_t top = std::min(n_max, std::min(d.depth(), t.depth()) - 1);
  for (std::size_t n = 1; n <= top; ++n) {
    mpz_class Kn = kappa_at(d, t, n), Kn1 = kappa_at(d, t, n + 1);
    auto inner = bohr_set(o, std::min(Kn, Kn1), BohrRadius::of(theta_norm(o, t, n + 1)));
    auto outer = bohr_set(o, Kn, BohrRadius::of(theta_norm(o, t, n)));
    for (const auto& k : inner.members)
      if (!std::binary_search(outer.members.begin(), outer.members.end(), k)) {
        rep.nesting = false;
        rep.violations.push_back("nesting at n = " + std::to_string(n) + ": k = " + k.get_str());
      }
  }
  return rep;
}

FrakDOracle::FrakDOracle(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d, const Exponent& beta)
    : o_(&o) {
  std::size_t L = std::min(d.depth(), t.depth());
  for (std::size_t n = 1; n <= L; ++n) {
    BohrRadius a = BohrRadius::of(theta_norm(o, t, n));
    levels_.push_back(Level{kappa_at(d, t, n), a, compact(radius_enclosure(o, a))});
    BohrRadius b{theta_norm(o, t, n - 1), d.digit(n - 1), beta};
    levels_.push_back(Level{kappa_at(d, t, n - 1) + t.q[n], b, compact(radius_enclosure(o, b))});
  }
}

bool FrakDOracle::contains(const mpz_class& k) const {
  LinForm dist = o_->dist_form(o_->shifted(k));
  CertifiedReal enc = o_->eval_rel(unit_term(dist), 64);
  for (const auto& lv : levels_) {
    if (k > lv.bound) continue;
    if (enc.upper() <= lv.enclosure.lower()) return true;
    if (enc.lower() > lv.enclosure.upper()) continue;
    if (dist_within(*o_, dist, lv.radius)) return true;
  }
  return false;
}

namespace {

// |w_k| = k^beta ||k alpha - rho||
Term abs_w(const Orbit& o, const mpz_class& k, const Exponent& beta) {
  return Term{mpq_class(k), beta, o.dist_form(o.shifted(k))};
}

CertifiedReal pow_enclosure(const mpz_class& L, const Exponent& beta) {
  if (beta.is_integer()) {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), L.get_mpz_t(), beta.integer());
    return CertifiedReal(p);
  }
  return CertifiedReal(L).pow(beta, 64);
}

// (k alpha - rho) mod 1 in P-bit fixed point for k <= hi, error below 2^(bitlen(hi) + 2 - P).
struct WideStep {
  long P;
  mpz_class A, R, mask;

  WideStep(const Orbit& o, const mpz_class& hi) {
    P = static_cast<long>(mpz_sizeinbase(hi.get_mpz_t(), 2)) + 96;
    mpz_class scale = mpz_class(1) << P;
    A = floor_q(o.eval(LinForm::alpha_times(1), P + 2).center() * mpq_class(scale));
    R = floor_q(o.eval(o.rho().form, P + 2).center() * mpq_class(scale));
    mask = scale - 1;
    err = std::ldexp(1.0, static_cast<int>(mpz_sizeinbase(hi.get_mpz_t(), 2)) + 3 - static_cast<int>(P));
  }
  double err = 0;
  // Approximate ||k alpha - rho||; exact enough to reject values far from H.
  double dist(const mpz_class& k) const {
    mpz_class x = k * A - R;
    x &= mask;
    mpz_class y = (mask + 1) - x;
    const mpz_class& m = x < y ? x : y;
    long e;
    double d = mpz_get_d_2exp(&e, m.get_mpz_t());
    return std::ldexp(d, static_cast<int>(e - P));
  }
};

struct BlockMin {
  std::optional<mpz_class> k;
  std::optional<Term> term;
};

void keep_min(const Orbit& o, BlockMin& best, const mpz_class& k, const Term& t) {
  if (!best.term || o.compare(t, *best.term) < 0) {
    best.k = k;
    best.term = t;
  }
}

}  // namespace

FilterReport filter_check(const Orbit& o, const ConvergentTable& t, const OstrowskiDigits& d, const Exponent& beta,
                          const mpz_class& N, const mpq_class& H, std::size_t max_hits) {
  FilterReport rep;
  rep.H = H;
  rep.N = N;
  const Term cap = unit_term(LinForm::constant(H));

  // n_h: smallest n with q_m^beta ||q_m alpha|| >= 4H for every m in [n, depth].
  const Term four_h = unit_term(LinForm::constant(4 * H));
  std::optional<std::size_t> nh;
  for (std::size_t n = t.depth(); n >= 1; --n) {
    if (o.compare(Term{mpq_class(t.q[n]), beta, t.theta_form(n)}, four_h) < 0) break;
    nh = n;
  }
  rep.n_h = nh;
  rep.hypothesis_ok = nh && t.depth() >= *nh + 2 && *nh <= d.depth();
  if (rep.hypothesis_ok) {
    rep.threshold = kappa_at(d, t, *nh) + t.q[*nh];
    rep.vacuous = *rep.threshold > N;
  }

  FrakDOracle D(o, t, d, beta);
  BlockMin total;
  auto record_hit = [&](const mpz_class& k, const Term& w) {
    ++rep.hit_count;
    if (rep.complement_hits.size() < 1000) rep.complement_hits.emplace_back(k, o.eval_rel(w, 64));
    if (rep.threshold && k >= *rep.threshold) rep.violations.push_back(k);
    if (max_hits && rep.hit_count >= max_hits) rep.truncated = true;
  };

  std::optional<FastOrbit> fo;
  bool all_exhaustive = true;
  mpz_class L = 1;
  while (L <= N && !rep.truncated) {
    CertifiedReal Lb = pow_enclosure(L, beta);
    mpz_class R = std::max(mpz_class(2 * L), floor_q(Lb.lower() / 16));
    if (R > N) R = N;
    BlockMin best;
    bool exhaustive = false;
    if (R.fits_ulong_p() && R <= detail::kBruteLimit) {
      if (!fo) fo.emplace(o);
      if (R.get_ui() <= fo->safe_limit()) {
        exhaustive = true;
        const double bd = beta.to_double(), hd = H.get_d();
        std::uint64_t lo = L.get_ui(), hi = R.get_ui();
        double best_approx = INFINITY;
        const double slack = std::ldexp(static_cast<double>(fo->error_units(hi)), -128);
        u128 x = fo->raw(lo);
        for (std::uint64_t k = lo;; ++k, x += fo->step()) {
          double kb = std::pow(static_cast<double>(k), bd);
          double v = kb * std::fabs(FastOrbit::to_double(x));
          double verr = kb * slack;
          if (v - verr < hd * (1 + 1e-9) || v - verr < best_approx * (1 + 1e-9)) {
            mpz_class K(static_cast<unsigned long>(k));
            Term w = abs_w(o, K, beta);
            bool below = o.compare(w, cap) < 0;
            if (!D.contains(K)) {
              if (below) record_hit(K, w);
              keep_min(o, best, K, w);
              if (best.k == K) best_approx = std::min(best_approx, v + verr);
            }
          }
          if (k == hi || rep.truncated) break;
        }
      }
    }
    if (!exhaustive) {
      mpq_class eps = H / Lb.lower();
      WideStep ws(o, R);
      const double bd = beta.to_double(), hd = H.get_d();
      window_candidates(o, L, R, eps, [&](const mpz_class& k) {
        if (rep.truncated) return;
        double dd = ws.dist(k) - ws.err;
        if (dd > 0) {
          long e;
          double km = mpz_get_d_2exp(&e, k.get_mpz_t());
          double lg = bd * (std::log2(km) + static_cast<double>(e)) + std::log2(dd);
          if (lg > std::log2(hd) + 1e-6) return;
        }
        Term w = abs_w(o, k, beta);
        if (o.compare(w, cap) >= 0 || D.contains(k)) return;
        record_hit(k, w);
        keep_min(o, best, k, w);
      });
    }
    FilterTracePoint pt;
    pt.N = R;
    pt.exhaustive = exhaustive;
    if (best.term) {
      pt.block_min = o.eval_rel(*best.term, 64);
      keep_min(o, total, *best.k, *best.term);
    }
    all_exhaustive = all_exhaustive && exhaustive;
    if (total.term && (all_exhaustive || o.compare(*total.term, cap) < 0)) pt.m = o.eval_rel(*total.term, 64);
    rep.trace.push_back(std::move(pt));
    L = R + 1;
  }
  return rep;
}

namespace {

Json trace_json(const FilterReport& r, int digits) {
  Json a = Json::array();
  for (const auto& p : r.trace) {
    Json e = Json::array();
    e.push_back(int_json(p.N));
    e.push_back(p.m ? Json(p.m->scientific(digits)) : Json(nullptr));
    a.push_back(e);
  }
  return a;
}

Json filter_obj(const FilterReport& r, int digits) {
  Json j;
  j["H"] = r.H.get_str();
  j["N"] = int_json(r.N);
  j["hypothesis_ok"] = r.hypothesis_ok;
  j["n_h"] = r.n_h ? Json(*r.n_h) : Json(nullptr);
  j["threshold"] = r.threshold ? int_json(*r.threshold) : Json(nullptr);
  j["vacuous"] = r.vacuous;
  j["holds"] = r.holds();
  j["complement_hit_count"] = r.hit_count;
  j["truncated"] = r.truncated;
  Json hits = Json::array();
  for (const auto& [k, v] : r.complement_hits) hits.push_back(Json::array({int_json(k), v.scientific(digits)}));
  j["complement_hits"] = hits;
  Json viol = Json::array();
  for (const auto& k : r.violations) viol.push_back(int_json(k));
  j["violations"] = viol;
  Json blocks = Json::array();
  for (const auto& p : r.trace) {
    Json b;
    b["N"] = int_json(p.N);
    b["block_min"] = ball_json(p.block_min, digits);
    b["exhaustive"] = p.exhaustive;
    blocks.push_back(b);
  }
  j["blocks"] = blocks;
  return j;
}

}  // namespace

std::string frak_json(const FrakD& D, const FilterReport* filter, int digits) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "bohr";
  j["n_max"] = D.n_max;
  Json members = Json::array();
  for (const auto& k : D.members) members.push_back(int_json(k));
  j["D"] = members;
  Json prov = Json::object(), kind = Json::object();
  for (const auto& [k, p] : D.provenance) {
    prov[k.get_str()] = p.n;
    kind[k.get_str()] = p.prime ? "N'" : "N";
  }
  j["provenance"] = prov;
  j["provenance_window"] = kind;
  j["complement_min_trace"] = filter ? trace_json(*filter, digits) : Json::array();
  if (filter) j["filter"] = filter_obj(*filter, digits);
  return j.dump(2);
}

std::string filter_json(const FilterReport& r, int digits) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["complement_min_trace"] = trace_json(r, digits);
  j["filter"] = filter_obj(r, digits);
  return j.dump(2);
}

}  // namespace osc
