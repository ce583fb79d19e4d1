// Acceptance run: one PASS/FAIL line per criterion with its runtime budget.
//
//   acceptance [--only N] [--expect-red 7,8]
//
// Exit status is 0 when every failing criterion is listed in --expect-red.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "osc/bohr_filter.hpp"
#include "osc/cf_engine.hpp"
#include "osc/constructors.hpp"
#include "osc/error.hpp"
#include "osc/mu_tau.hpp"
#include "osc/orbit.hpp"
#include "osc/oscillator.hpp"
#include "osc/ostrowski.hpp"

using namespace osc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

Exponent ex(const char* s) { return Exponent::parse(s); }

std::string sci(const mpq_class& v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v.get_d();
  return os.str();
}
std::string sci(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::size_t bitlen(const mpz_class& v) { return mpz_sizeinbase(v.get_mpz_t(), 2); }

const std::vector<std::string_view> kThree = {specs::kSqrt2, specs::kGolden, specs::kSqrt3};
constexpr std::string_view kPiLike = "dec:3.14159265358979323846264338327950288419716939937510@50";
constexpr const char* kLiouville = "rule:liouville:2";

// 1: q_n <q_n alpha>_2 over even n <= 40 against 5^(-1/2), then the classifier.
Outcome c1() {
  auto t = build_table(make_alpha(specs::kGolden), 41);
  auto m = convergent_mu(t, ex("1"), Parity::Even, 1, 40);
  if (!m) return {false, "no even index"};
  const mpq_class ref("4472135955/10000000000");
  const mpq_class dev = abs(m->value.center() - ref) + m->value.radius();
  auto v = classify_density(GrowthSpec::power(ex("1")), periodic_model("sin2pi"), t.alpha);
  const bool nd = v.positive.verdict == SideVerdict::NotDenseByNecessity &&
                  v.negative.verdict == SideVerdict::NotDenseByNecessity;
  Outcome o;
  o.pass = dev <= mpq_class(1, 10000) && nd;
  o.detail = "even min = " + m->value.scientific(12) + " at n = " + std::to_string(m->index) +
             ", |min - 0.4472135955| <= " + sci(dev, 3) + "; classify k sin(2 pi k alpha): " +
             side_verdict_name(v.positive.verdict) + " / " + side_verdict_name(v.negative.verdict);
  return o;
}

// 2: brute force over k <= q_10 against the parity-restricted convergent minima.
Outcome c2() {
  Outcome o{true, ""};
  double worst = 0;
  for (auto spec : kThree)
    for (const char* b : {"1", "2"}) {
      auto s = Clock::now();
      auto t = build_table(make_alpha(spec), 12);
      auto r = check_lemma2_report(t, ex(b), 10);
      double dt = std::chrono::duration<double>(Clock::now() - s).count();
      worst = std::max(worst, dt);
      if (!r.holds || dt >= 5) {
        o.pass = false;
        o.detail += std::string(spec) + " beta=" + b + (r.holds ? " too slow; " : " mismatch; ");
      }
    }
  o.detail += "6 cases exact, same argmin both signs; slowest case " + sci(worst, 3) + " s";
  return o;
}

// 3: small-norm spectrum containment for even n <= 8.
Outcome c3() {
  Outcome o{true, ""};
  std::size_t levels = 0;
  std::vector<std::string_view> specs = kThree;
  specs.push_back("rule:e:");
  for (auto spec : specs) {
    auto t = build_table(make_alpha(spec), 10);
    // index 0 is an even level only when a_1 >= 2
    for (std::size_t n = t.a[1] >= 2 ? 0 : 2; n <= 8; n += 2) {
      ++levels;
      if (!small_norm_spectrum(t, n).holds()) {
        o.pass = false;
        o.detail += std::string(spec) + " n=" + std::to_string(n) + " fails; ";
      }
    }
  }
  o.detail += std::to_string(levels) + " levels on sqrt2, golden, sqrt3, rule:e:";
  return o;
}

// 4: integer Ostrowski roundtrip and uniqueness.
Outcome c4() {
  Outcome o{true, ""};
  for (auto spec : {specs::kGolden, specs::kSqrt2}) {
    auto a = make_alpha(spec);
    std::size_t N = 0;
    while (a->q(N + 1) <= 100000) ++N;
    auto t = build_table(a, N);
    long bad = 0;
    for (long k = 0; k <= 100000; ++k) {
      auto d = ostrowski_int(k, t);
      mpz_class s = 0;
      for (std::size_t j = 0; j < d.e.size(); ++j) s += d.e[j] * t.q[j];
      if (s != k || !digits_legal(d, t, true)) ++bad;
    }
    if (bad) o.pass = false;
    o.detail += std::string(spec) + ": " + std::to_string(bad) + " failures over k <= 1e5; ";
  }
  const long K = 10000;
  auto a = make_alpha(specs::kGolden);
  std::size_t N = 0;
  while (a->q(N + 1) <= K) ++N;
  auto t = build_table(a, N + 1);
  std::map<long, int> seen;
  std::function<void(long, long, long)> rec = [&](long n, long sum, long next) {
    if (n < 0) {
      seen[sum]++;
      return;
    }
    long hi = n == 0 ? t.a[1].get_si() - 1 : t.a[n + 1].get_si();
    for (long v = 0; v <= hi; ++v) {
      long s = sum + v * t.q[n].get_si();
      if (s > K) break;
      if (n >= 1 && n + 1 <= static_cast<long>(N) && next == t.a[n + 2].get_si() && v != 0) break;
      rec(n - 1, s, v);
    }
  };
  rec(static_cast<long>(N), 0, 0);
  bool unique = seen.size() == static_cast<std::size_t>(K + 1);
  for (auto& [k, c] : seen) unique = unique && c == 1;
  if (!unique) o.pass = false;
  o.detail += std::string("golden uniqueness k <= 1e4: ") + (unique ? "every k once" : "violated");
  return o;
}

// 5: real-rho residue bound for n <= 20.
Outcome c5() {
  Outcome o{true, ""};
  std::size_t checks = 0;
  for (auto spec : kThree) {
    auto t = build_table(make_alpha(spec), 22);
    std::vector<Rho> rhos = {Rho::parse("1/3"), Rho::parse(kPiLike), Rho::from_form(t.err_form(2))};
    for (const auto& rho : rhos) {
      Orbit orb(t.alpha, rho);
      auto d = ostrowski_real(orb, t, 20);
      for (std::size_t n = 0; n <= 20; ++n) {
        ++checks;
        if (!residue_bound_check(orb, d, t, n)) {
          o.pass = false;
          o.detail += std::string(spec) + " rho=" + rho.str() + " n=" + std::to_string(n) + "; ";
        }
      }
    }
  }
  o.detail += std::to_string(checks) + " certified residue checks (rho = 1/3, pi-like decimal, <q_2 alpha>_2)";
  return o;
}

// 6: alternating tail identity.
Outcome c6() {
  Outcome o{true, ""};
  std::size_t checks = 0;
  for (auto spec : kThree) {
    auto t = build_table(make_alpha(spec), 22);
    for (std::size_t n = 1; n <= 10; ++n)
      for (std::size_t k = 1; k <= 5; ++k) {
        ++checks;
        if (!alternating_tail_identity_check(t, n, k).holds) {
          o.pass = false;
          o.detail += std::string(spec) + " n=" + std::to_string(n) + " terms=" + std::to_string(k) + "; ";
        }
      }
  }
  o.detail += std::to_string(checks) + " exact residual bounds";
  return o;
}

// 7: sandwich inclusions and nesting at n_max = 15.
Outcome c7() {
  Outcome o;
  auto g = build_table(make_alpha(specs::kGolden), 20);
  Orbit og(g.alpha, Rho::parse("1/3"));
  auto dg = ostrowski_real(og, g, 17);
  auto rg = verify_inclusions(og, g, dg, ex("1"), 15);
  o.detail = std::string("golden, rho = 1/3, beta = 1, n_max = 15: ") + (rg.holds() ? "holds" : "FAILS") + "; ";

  // Liouville-built, beta = 2, rho with digits e_n = 1: n_max = 15 needs q_18
  const std::size_t want = 15;
  std::string why;
  try {
    build_table(make_alpha(kLiouville), want + 3);
  } catch (const Error& e) {
    why = e.what();
  }
  auto L = build_liouville_alpha(ex("2"), want + 3);
  const std::size_t n_feasible = L.depth_reached - 3;
  auto t = build_table(L.alpha, n_feasible + 3);
  OstrowskiDigits d;
  d.alpha = t.alpha->str();
  d.e.assign(n_feasible + 2, 1);
  d.e[0] = 0;
  Orbit ol(t.alpha, digits_rho(d, t));
  auto rl = verify_inclusions(ol, t, d, ex("2"), n_feasible);
  o.detail += "Liouville, digits 1, beta = 2: n_max = " + std::to_string(n_feasible) + " " +
              (rl.holds() ? "holds" : "FAILS") + "; n_max = 15 not reachable (" + why + ")";
  o.pass = rg.holds() && rl.holds() && n_feasible >= want;
  return o;
}

// 8: complement minima beyond the threshold on the Liouville-built alpha, bounded control alongside.
Outcome c8() {
  Outcome o;
  // real digits to level n read q_{n+3}; q_13 is over the bit budget, so K_9 is the deepest scale
  const std::size_t depth = 10;
  auto t = build_table(make_alpha(kLiouville), depth);
  auto me = convergent_mu(t, ex("2"), Parity::Even, 1, depth);
  auto mo = convergent_mu(t, ex("2"), Parity::Odd, 1, depth);
  Orbit orb(t.alpha, Rho::parse("1/3"));
  auto d = ostrowski_real(orb, t, depth - 1);
  const mpz_class N = kappa_seq(d, t)[depth - 1];
  auto r = filter_check(orb, t, d, ex("2"), N, 10, 2000);
  o.detail = "Liouville rho = 1/3, N = K_9 (" + std::to_string(bitlen(N)) + " bits; K_10 needs q_13): convergent minima even " +
             (me ? me->value.scientific(3) : "-") + " odd " + (mo ? mo->value.scientific(3) : "-") +
             " (-> 0, mu = 0 not +inf); hypothesis_ok = " + (r.hypothesis_ok ? "true" : "false") +
             ", complement hits with |w| < 10: " + std::to_string(r.hit_count) + (r.truncated ? "+ (capped)" : "");
  o.detail += ", threshold " + (r.threshold ? std::to_string(bitlen(*r.threshold)) + " bits" : std::string("none")) +
              ", hits beyond it " + std::to_string(r.violations.size());
  for (const auto& [k, w] : r.complement_hits)
    if (bitlen(k) > 16) {
      o.detail += ", e.g. k = " + k.get_str() + " |w| = " + w.scientific(3);
      break;
    }
  auto g = build_table(make_alpha(specs::kGolden), 40);
  Orbit og(g.alpha, Rho::parse("1/3"));
  auto rg = filter_check(og, g, ostrowski_real(og, g, 38), ex("2"), 200000, 10);
  o.detail += std::string("; control golden beta = 2, N = 2e5: ") + (rg.holds() ? "holds" : "fails");
  o.pass = r.holds();
  return o;
}

// 9: rho builder with five targets, re-evaluated from a fresh alpha.
Outcome c9() {
  Outcome o{true, ""};
  auto t = build_table(make_alpha(kLiouville), 9);
  std::vector<mpq_class> targets;
  for (const char* b : {"1", "-2", "1/2", "3", "-1/4"}) targets.push_back(parse_rational(b));
  auto c = build_rho(t, ex("2"), targets);
  auto fresh_alpha = make_alpha(kLiouville);
  auto ft = build_table(fresh_alpha, 9);
  Orbit fresh(fresh_alpha, Rho::parse(c.rho));
  o.detail = std::string(rho_case_name(c.used)) + ", rho = " + c.rho.substr(0, 24) + "...; residuals:";
  if (c.entries.size() != targets.size()) o.pass = false;
  for (const auto& e : c.entries) {
    mpz_class K = 0;
    for (std::size_t n = 0; n <= e.m; ++n) K += c.digits.digit(n) * ft.q[n];
    CertifiedReal w = fresh.eval_rel(fresh.w_term(K, ex("2")), 96);
    const mpq_class res = abs(w.center() - e.target) + w.radius();
    const bool ok = res <= mpq_class(1, static_cast<unsigned long>(e.j)) && K == e.k;
    o.pass = o.pass && ok;
    o.detail += " j" + std::to_string(e.j) + "(m=" + std::to_string(e.m) + ") " + sci(res, 2) + (ok ? "" : "!");
  }
  return o;
}

// 10: rational and real witnesses, three targets each at tol = 0.1.
Outcome c10() {
  Outcome o{true, ""};
  const mpq_class tol(1, 10);
  auto t = build_table(make_alpha(kLiouville), 8);
  auto check = [&](const Rho& rho, const Witness& w, const mpq_class& h) {
    Orbit fresh(make_alpha(kLiouville), rho);
    CertifiedReal v = fresh.eval_rel(fresh.w_term(w.k, ex("2")), 96);
    const bool ok = abs(v.center() - h) + v.radius() <= tol;
    o.pass = o.pass && ok;
    o.detail += " h=" + h.get_str() + ":" + v.scientific(4) + (ok ? "" : "!");
  };
  o.detail = "rational rho = 1/3:";
  for (const char* h : {"1", "-3", "1/2"}) {
    auto w = rational_witness(t, ex("2"), 1, 3, parse_rational(h), tol, 200000);
    check(Rho::parse("1/3"), w, parse_rational(h));
  }
  OstrowskiDigits d;
  d.alpha = t.alpha->str();
  d.e.assign(8, 1);
  d.e[0] = 0;
  o.detail += "; digit-built rho (e_n = 1):";
  for (const char* h : {"-3", "5", "7/10"}) {
    auto w = real_witness(t, ex("2"), d, parse_rational(h), tol);
    check(digits_rho(d, t), w, parse_rational(h));
  }
  return o;
}

// 11: asymmetric alpha, depth 20.
Outcome c11() {
  Outcome o;
  auto A = build_asymmetric_alpha(ex("2"), 1, 20);
  auto t = build_table(A.alpha, A.depth_reached);
  auto me = convergent_mu(t, ex("2"), Parity::Even, 1, t.depth());
  auto mo = convergent_mu(t, ex("2"), Parity::Odd, 1, t.depth());
  if (!me || !mo) return {false, "missing parity"};
  const bool even_ok = me->value.upper() <= mpq_class(1, 100);
  const bool odd_ok = mo->value.lower() >= mpq_class(1, 100);
  o.pass = even_ok && odd_ok && A.complete;
  o.detail = A.spec + " depth " + std::to_string(A.depth_reached) + " (q_20 " + std::to_string(bitlen(t.q[t.depth()])) +
             " bits): even min " + me->value.scientific(4) + " at n = " + std::to_string(me->index) +
             (even_ok ? " <= 1e-2" : " > 1e-2") + ", odd min " + mo->value.scientific(4) + " at n = " +
             std::to_string(mo->index) + (odd_ok ? " >= 1e-2" : " < 1e-2");
  return o;
}

// 12: classifier verdicts and fill reports.
Outcome c12() {
  Outcome o{true, ""};
  auto F = periodic_model("sin2pi");
  auto golden = make_alpha(specs::kGolden);
  auto liou = make_alpha(kLiouville);
  auto v05 = classify_density(GrowthSpec::power(ex("1/2")), F, golden);
  auto v1 = classify_density(GrowthSpec::power(ex("1")), F, golden);
  auto v2 = classify_density(GrowthSpec::power(ex("2")), F, liou);
  auto both = [](const DensityVerdict& v, SideVerdict s) { return v.positive.verdict == s && v.negative.verdict == s; };
  const bool a = both(v05, SideVerdict::DenseByCorollary2);
  const bool b = both(v1, SideVerdict::NotDenseByNecessity);
  const bool c = both(v2, SideVerdict::DenseIffConditionMet) && v2.positive.condition.rfind("mu", 0) == 0;
  o.detail = std::string("golden 0.5: ") + side_verdict_name(v05.positive.verdict) + "; golden 1: " +
             side_verdict_name(v1.positive.verdict) + "; Liouville 2: " + side_verdict_name(v2.positive.verdict) +
             " (" + v2.positive.condition + ")";
  auto f05 = empirical_density(GrowthSpec::power(ex("1/2")), F, golden, 1000000, 3, 60);
  auto f2 = empirical_density(GrowthSpec::power(ex("2")), F, liou, 1000000, 3, 60);
  o.detail += "; fills N = 1e6, [-3,3], 60 bins: golden 0.5 empty " + std::to_string(f05.empty_bins) +
              ", Liouville 2 empty " + std::to_string(f2.empty_bins) + " (widest gap " + sci(f2.max_empty_gap, 3) +
              ", outside " + std::to_string(f2.outside) + ")";
  o.pass = a && b && c && f05.empty_bins == 0 && f2.empty_bins == 0;
  return o;
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string expect_red;
  app.add_option("--only", only, "run a single criterion");
  app.add_option("--expect-red", expect_red, "comma separated criteria known to be unattainable");
  CLI11_PARSE(app, argc, argv);
  std::set<int> allowed;
  try {
    allowed = parse_ids(expect_red);
  } catch (const std::exception&) {
    std::cerr << "bad --expect-red list\n";
    return 1;
  }

  const std::vector<Criterion> all = {
      {1, "hurwitz-constant", 1, c1},         {2, "convergent-equivalence", 30, c2},
      {3, "small-norm-spectrum", 10, c3},     {4, "ostrowski-integer", 30, c4},
      {5, "real-rho-residue", 5, c5},         {6, "alternating-tail", 5, c6},
      {7, "sandwich-inclusions", 60, c7},     {8, "filter-beyond-threshold", 60, c8},
      {9, "rho-builder-certificate", 60, c9}, {10, "witness-soundness", 30, c10},
      {11, "asymmetric-alpha", 10, c11},      {12, "classifier-and-fill", 120, c12},
  };

  std::vector<int> red;
  int passed = 0, ran = 0;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    ++ran;
    auto s = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(Clock::now() - s).count();
    const bool in_time = dt < c.budget_s;
    const bool ok = out.pass && in_time;
    std::cout << "criterion " << std::setw(2) << c.id << ' ' << (ok ? "PASS" : "FAIL") << ' ' << c.name << " ["
              << std::fixed << std::setprecision(2) << dt << " s / " << std::setprecision(0) << c.budget_s
              << " s] " << out.detail << (in_time ? "" : " (over budget)") << '\n'
              << std::defaultfloat << std::flush;
    if (ok)
      ++passed;
    else
      red.push_back(c.id);
  }
  std::cout << "acceptance: " << passed << "/" << ran << " pass";
  bool unexpected = false;
  if (!red.empty()) {
    std::cout << "; red:";
    for (int id : red) {
      std::cout << ' ' << id;
      if (!allowed.count(id)) {
        std::cout << "(unexpected)";
        unexpected = true;
      }
    }
  }
  std::cout << '\n';
  return unexpected ? 1 : 0;
}
