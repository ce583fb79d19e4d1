// oscillate: batch front end over the osc library.
//
// Exit codes: 0 success, 2 a verification failed, 1 usage or numeric errors.
// Diagnostics go to stderr as one JSON object per line.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "osc/bohr_filter.hpp"
#include "osc/cf_engine.hpp"
#include "osc/constructors.hpp"
#include "osc/error.hpp"
#include "osc/fast_orbit.hpp"
#include "osc/json_io.hpp"
#include "osc/mu_tau.hpp"
#include "osc/orbit.hpp"
#include "osc/oscillator.hpp"
#include "osc/ostrowski.hpp"

namespace {

using namespace osc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void diagnostic(const std::string& kind, const std::string& code, const std::string& message) {
  Json j;
  j["error"] = kind;
  j["code"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

// Every option is held as text, so a config is a flat string map.
struct Config {
  std::string subcommand;
  std::map<std::string, std::string> values;

  const std::string& str(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) throw UsageError("option --" + k + " is not defined for " + subcommand);
    return it->second;
  }
  std::uint64_t u64(const std::string& k) const {
    const std::string& s = str(k);
    mpz_class v;
    if (s.empty() || v.set_str(s, 10) != 0 || v < 0 || !v.fits_ulong_p())
      throw UsageError("--" + k + " expects a non-negative integer, got '" + s + "'");
    return v.get_ui();
  }
  mpz_class integer(const std::string& k) const {
    mpz_class v;
    if (v.set_str(str(k), 10) != 0) throw UsageError("--" + k + " expects an integer");
    return v;
  }
  double real(const std::string& k) const {
    const std::string& s = str(k);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("--" + k + " expects a number, got '" + s + "'");
  }
  bool flag(const std::string& k) const {
    const std::string& s = str(k);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError("--" + k + " expects true or false");
  }
  Exponent beta() const { return Exponent::parse(str("beta")); }
  mpq_class rational(const std::string& k) const { return parse_rational(str(k)); }
  AlphaPtr alpha() const { return make_alpha(str("alpha")); }
  int digits() const { return static_cast<int>(u64("digits")); }
  unsigned threads() const {
    auto n = u64("threads");
    if (n == 0) throw UsageError("--threads must be at least 1");
    return static_cast<unsigned>(n);
  }
};

Json config_json(const Config& c) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["subcommand"] = c.subcommand;
  Json o = Json::object();
  for (const auto& [k, v] : c.values) o[k] = v;
  j["options"] = o;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "@file" names a digit file; anything else is a Rho spec.
Rho parse_rho(const std::string& text, const AlphaPtr& alpha) {
  if (!text.empty() && text[0] == '@') {
    OstrowskiDigits d = digits_from_json(read_file(text.substr(1)));
    auto t = build_table(alpha, d.depth() + 1);
    return digits_rho(d, t);
  }
  return Rho::parse(text);
}

// Digits of rho: taken from the file when given, otherwise extracted to depth N.
OstrowskiDigits rho_digits(const std::string& text, const Orbit& o, const ConvergentTable& t, std::size_t N) {
  if (!text.empty() && text[0] == '@') return digits_from_json(read_file(text.substr(1)));
  return ostrowski_real(o, t, N);
}

std::vector<mpq_class> parse_list(const std::string& text) {
  std::vector<mpq_class> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_rational(item));
  return out;
}

std::size_t bitlen(const mpz_class& v) { return mpz_sizeinbase(v.get_mpz_t(), 2); }

std::size_t depth_of(const Config& c) {
  auto d = c.u64("depth");
  if (d < 1) throw UsageError("--depth must be at least 1");
  return d;
}

GrowthSpec growth_of(const Config& c) {
  const std::string& u = c.str("growth");
  return u == "none" ? GrowthSpec::power(c.beta()) : GrowthSpec::with_perturbation(c.beta(), u);
}

CoveringRule covering_rule(const std::string& text) {
  if (text == "stated") return CoveringRule::Stated;
  if (text == "derived") return CoveringRule::Derived;
  throw UsageError("--covering must be stated or derived");
}

// ---- subcommands ----------------------------------------------------------

struct Result {
  std::string text;
  int code = kExitOk;
};

void require_format(const Config& c, std::initializer_list<const char*> allowed) {
  for (auto a : allowed)
    if (c.str("format") == a) return;
  throw UsageError("--format " + c.str("format") + " is not supported by " + c.subcommand);
}

Result cmd_cf(const Config& c) {
  require_format(c, {"csv", "json"});
  auto t = build_table(c.alpha(), depth_of(c));
  if (c.str("format") == "csv") return {table_csv(t, c.digits())};
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "cf";
  j["alpha"] = t.alpha->str();
  j["depth"] = t.depth();
  Json rows = Json::array();
  for (std::size_t n = 0; n <= t.depth(); ++n) {
    Json r;
    r["n"] = n;
    r["a"] = int_json(t.a[n]);
    r["p"] = int_json(t.p[n]);
    r["q"] = int_json(t.q[n]);
    r["signed_err"] = n == 0 ? Json(nullptr) : ball_json(t.err_at(n).value, c.digits());
    rows.push_back(r);
  }
  j["rows"] = rows;
  return {j.dump(2)};
}

Result cmd_ostrowski(const Config& c) {
  require_format(c, {"json"});
  auto t = build_table(c.alpha(), depth_of(c));
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "ostrowski";
  j["alpha"] = t.alpha->str();
  if (!c.str("k").empty()) {
    mpz_class k = c.integer("k");
    if (k < 0) throw UsageError("--k must be non-negative");
    OstrowskiDigits d = ostrowski_int(k, t);
    mpz_class sum = 0;
    for (std::size_t n = 0; n < d.e.size(); ++n) sum += d.e[n] * t.q[n];
    j["mode"] = "integer";
    j["k"] = int_json(k);
    j["expansion"] = Json::parse(digits_to_json(d));
    j["legal"] = digits_legal(d, t, true);
    j["sum_matches"] = sum == k;
    return {j.dump(2)};
  }
  if (t.depth() < 2) throw UsageError("--depth must be at least 2 for real digits");
  Rho rho = parse_rho(c.str("rho"), t.alpha);
  Orbit o(t.alpha, rho);
  OstrowskiDigits d = rho_digits(c.str("rho"), o, t, t.depth() - 1);
  j["mode"] = "real";
  j["rho"] = rho.str();
  j["expansion"] = Json::parse(digits_to_json(d));
  j["legal"] = digits_legal(d, t);
  Json res = Json::array();
  bool all = true;
  for (std::size_t n = 0; n <= d.depth(); ++n) {
    Json r;
    r["n"] = n;
    r["reconstruction"] = ball_json(reconstruct(d, t, n), c.digits());
    bool ok = residue_bound_check(o, d, t, n);
    all = all && ok;
    r["residue_ok"] = ok;
    res.push_back(r);
  }
  j["residues"] = res;
  j["residue_ok"] = all;
  return {j.dump(2)};
}

Result cmd_mu(const Config& c) {
  require_format(c, {"json", "csv"});
  auto alpha = c.alpha();
  Orbit o(alpha, parse_rho(c.str("rho"), alpha));
  ScanRecord rec = scan_mu(o, c.beta(), c.u64("N"), c.threads());
  if (c.str("format") == "csv") return {scan_csv(rec, c.digits())};
  Json j = Json::parse(mu_json(estimate_mu(rec, c.real("tol")), c.digits()));
  j["alpha"] = alpha->str();
  j["k_plus"] = rec.final_min_plus ? int_json(rec.k_plus) : Json(nullptr);
  j["k_minus"] = rec.final_min_minus ? int_json(rec.k_minus) : Json(nullptr);
  return {j.dump(2)};
}

Result cmd_tau(const Config& c) {
  require_format(c, {"json"});
  auto t = build_table(c.alpha(), depth_of(c));
  if (t.depth() < 2) throw UsageError("--depth must be at least 2");
  Rho rho = parse_rho(c.str("rho"), t.alpha);
  Orbit o(t.alpha, rho);
  OstrowskiDigits d = rho_digits(c.str("rho"), o, t, t.depth() - 1);
  TauEstimate est = tau_estimate(t, c.beta(), d, d.depth());
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "tau";
  j["alpha"] = t.alpha->str();
  j["beta"] = c.beta().str();
  j["rho"] = rho.str();
  j["depth"] = d.depth();
  j["tau_plus_upper"] = ball_json(est.tau_plus_upper, c.digits());
  j["index_plus"] = est.tau_plus_upper ? Json(est.index_plus) : Json(nullptr);
  j["tau_minus_upper"] = ball_json(est.tau_minus_upper, c.digits());
  j["index_minus"] = est.tau_minus_upper ? Json(est.index_minus) : Json(nullptr);
  j["terminating"] = est.terminating;
  j["digits"] = Json::parse(digits_to_json(d))["digits"];
  return {j.dump(2)};
}

std::string w_series_csv(const Orbit& o, const Exponent& beta, std::uint64_t N, int digits) {
  FastOrbit f(o);
  if (N > f.safe_limit()) throw Error(ErrorCode::PrecisionCapExceeded, "N beyond the fixed-point range");
  std::ostringstream os;
  os << "k,w,radius\n";
  os.precision(17);
  const double b = beta.to_double();
  for (std::uint64_t k = 1; k <= N; ++k) {
    auto x = f.raw(k);
    auto err = f.error_units(k);
    if (FastOrbit::certain_sign(x, err) == 2) {
      // ambiguous in fixed point: exact enclosure instead
      CertifiedReal w = o.eval_rel(o.w_term(mpz_class(static_cast<unsigned long>(k)), beta), 64);
      os << k << ',' << w.scientific(digits) << ',' << w.radius_string() << '\n';
      continue;
    }
    const double v = FastOrbit::to_double(x);
    const double g = std::pow(static_cast<double>(k), b);
    const double w = g * v;
    const double rad = g * (static_cast<double>(err) * 0x1p-128 + std::fabs(v) * 0x1p-52) + std::fabs(w) * 0x1p-50;
    os << k << ',' << w << ',' << rad << '\n';
  }
  return os.str();
}

Result cmd_scan(const Config& c) {
  require_format(c, {"csv", "json"});
  auto alpha = c.alpha();
  const std::uint64_t N = c.u64("N");
  const std::string& series = c.str("series");
  if (series == "w") {
    if (c.str("format") != "csv") throw UsageError("--series w only emits csv");
    Orbit o(alpha, parse_rho(c.str("rho"), alpha));
    return {w_series_csv(o, c.beta(), N, c.digits())};
  }
  if (series != "y") throw UsageError("--series must be y or w");
  auto F = periodic_model(c.str("F"));
  auto g = growth_of(c);
  if (c.str("format") == "json") {
    auto r = empirical_density(g, F, alpha, N, c.real("H"), c.u64("bins"));
    Json j = Json::parse(fill_json(r));
    j["alpha"] = alpha->str();
    j["F"] = F.name;
    j["beta"] = c.beta().str();
    j["growth"] = g.u_name;
    j["N"] = N;
    return {j.dump(2)};
  }
  return {sequence_csv(eval_sequence(g, F, alpha, 1, N))};
}

Result cmd_witness(const Config& c) {
  require_format(c, {"json"});
  auto t = build_table(c.alpha(), depth_of(c));
  const Exponent beta = c.beta();
  const mpq_class h = c.rational("target"), tol = c.rational("tol");
  Rho rho = parse_rho(c.str("rho"), t.alpha);
  Witness w;
  if (rho.is_rational()) {
    mpq_class r = rho.rational_value();
    w = rational_witness(t, beta, r.get_num(), r.get_den(), h, tol, c.u64("scan-bound"));
  } else {
    if (t.depth() < 2) throw UsageError("--depth must be at least 2");
    Orbit o(t.alpha, rho);
    w = real_witness(t, beta, rho_digits(c.str("rho"), o, t, t.depth() - 1), h, tol);
  }
  // from-scratch check on a fresh orbit
  Orbit fresh(make_alpha(t.alpha->str()), rho);
  CertifiedReal v = fresh.eval_rel(fresh.w_term(w.k, beta), 96);
  const bool hit = abs(v.center() - h) + v.radius() <= tol;
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "witness";
  j["alpha"] = t.alpha->str();
  j["beta"] = beta.str();
  j["rho"] = rho.str();
  j["h"] = h.get_str();
  j["tol"] = tol.get_str();
  j["k"] = int_json(w.k);
  j["m"] = int_json(w.m);
  j["l"] = int_json(w.l);
  j["construction"] = w.construction;
  j["value"] = ball_json(v, c.digits());
  j["hit"] = hit;
  return {j.dump(2), hit ? kExitOk : kExitVerifyFailed};
}

Result cmd_bohr(const Config& c) {
  require_format(c, {"json"});
  auto t = build_table(c.alpha(), depth_of(c));
  const Exponent beta = c.beta();
  const std::size_t n_max = c.u64("n-max");
  if (n_max + 3 > t.depth()) throw UsageError("--depth must be at least n-max + 3");
  Rho rho = parse_rho(c.str("rho"), t.alpha);
  Orbit o(t.alpha, rho);
  OstrowskiDigits d = rho_digits(c.str("rho"), o, t, n_max + 2);
  const std::string& rule_text = c.str("covering");
  const CoveringRule rule = covering_rule(rule_text);
  FrakD D = frak_D(o, t, d, beta, n_max);
  InclusionReport inc = verify_inclusions(o, t, d, beta, n_max, rule);
  std::optional<FilterReport> filter;
  if (!c.str("N").empty())
    filter = filter_check(o, t, d, beta, c.integer("N"), c.rational("H"), c.u64("max-hits"));
  Json j = Json::parse(frak_json(D, filter ? &*filter : nullptr, c.digits()));
  j["alpha"] = t.alpha->str();
  j["beta"] = beta.str();
  j["rho"] = rho.str();
  Json ij;
  ij["covering"] = rule_text;
  ij["kappa_in_D"] = inc.kappa_in_D;
  ij["D_covered"] = inc.D_covered;
  ij["nesting"] = inc.nesting;
  ij["violations"] = inc.violations;
  ij["holds"] = inc.holds();
  j["inclusions"] = ij;
  const bool ok = inc.holds() && (!filter || filter->holds());
  return {j.dump(2), ok ? kExitOk : kExitVerifyFailed};
}

Result cmd_build_rho(const Config& c) {
  require_format(c, {"json"});
  auto t = build_table(c.alpha(), depth_of(c));
  auto targets = parse_list(c.str("targets"));
  auto cert = build_rho(t, c.beta(), targets, parse_rho_case(c.str("case")), c.real("tol"));
  return {certificate_json(cert, c.digits()), cert.valid() ? kExitOk : kExitVerifyFailed};
}

Result cmd_build_alpha(const Config& c) {
  require_format(c, {"json"});
  const std::string& kind = c.str("type");
  const std::size_t n_max = c.u64("n-max");
  BuiltAlpha A;
  if (kind == "asym")
    A = build_asymmetric_alpha(c.beta(), c.integer("C"), n_max, c.flag("swap"));
  else if (kind == "liouville")
    A = build_liouville_alpha(c.beta(), n_max);
  else
    throw UsageError("--type must be asym or liouville");
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "alpha";
  j["spec"] = A.spec;
  j["n_max"] = n_max;
  j["depth_reached"] = A.depth_reached;
  j["complete"] = A.complete;
  Json a = Json::array(), abits = Json::array(), qbits = Json::array();
  for (std::size_t n = 0; n <= A.depth_reached; ++n) {
    mpz_class an = A.alpha->quotient(n);
    a.push_back(bitlen(an) <= 62 ? int_json(an) : Json(nullptr));
    abits.push_back(bitlen(an));
    qbits.push_back(bitlen(A.alpha->q(n)));
  }
  j["a"] = a;
  j["a_bits"] = abits;
  j["q_bits"] = qbits;
  return {j.dump(2)};
}

Result cmd_classify(const Config& c) {
  require_format(c, {"json"});
  auto F = periodic_model(c.str("F"));
  auto alpha = c.alpha();
  auto g = growth_of(c);
  ClassifyOptions opt;
  opt.N = c.u64("N");
  opt.tol = c.real("tol");
  opt.max_depth = depth_of(c);
  auto v = classify_density(g, F, alpha, opt);
  Json j = Json::parse(verdict_json(v, F, c.digits()));
  j["alpha"] = alpha->str();
  j["growth"] = g.u_name;
  if (auto fillN = c.u64("fill-N"); fillN > 0)
    j["fill"] = Json::parse(fill_json(empirical_density(g, F, alpha, fillN, c.real("H"), c.u64("bins"))));
  return {j.dump(2)};
}

// ---- verify suites --------------------------------------------------------

constexpr std::size_t kBruteBits = 22;  // brute-force ranges stay below 2^22

struct SuiteResult {
  bool passed = true;
  Json detail = Json::object();
};

SuiteResult suite_lemma2(const ConvergentTable& t, const Exponent& beta, unsigned threads) {
  SuiteResult r;
  std::size_t N = 0;
  for (std::size_t n = 1; n <= t.depth() && bitlen(t.q[n]) <= kBruteBits; ++n) N = n;
  r.detail["N"] = N;
  if (beta.value() < 1) {
    r.detail["skipped"] = "the equivalence is stated for beta >= 1";
    return r;
  }
  if (N == 0) {
    r.detail["skipped"] = "q_1 beyond the brute-force range";
    return r;
  }
  auto rep = check_lemma2_report(t, beta, N, threads);
  r.passed = rep.holds;
  r.detail["scan_k_plus"] = int_json(rep.scan_k_plus);
  r.detail["conv_k_plus"] = int_json(rep.conv_k_plus);
  r.detail["scan_k_minus"] = int_json(rep.scan_k_minus);
  r.detail["conv_k_minus"] = int_json(rep.conv_k_minus);
  return r;
}

SuiteResult suite_spectrum(const ConvergentTable& t) {
  SuiteResult r;
  Json checked = Json::array();
  // with a_1 = 1, q_0 = q_1 and index 0 carries the odd sign: it is not an even level
  const std::size_t first = t.a[1] >= 2 ? 0 : 2;
  r.detail["first_level"] = first;
  for (std::size_t n = first; n + 2 <= t.depth() && bitlen(t.q[n + 2]) <= kBruteBits; n += 2) {
    bool ok = small_norm_spectrum(t, n).holds();
    r.passed = r.passed && ok;
    checked.push_back({{"n", n}, {"holds", ok}});
  }
  r.detail["levels"] = checked;
  return r;
}

SuiteResult suite_ostrowski(const ConvergentTable& t) {
  SuiteResult r;
  mpz_class K = t.q[t.depth()] - 1;
  if (K > 10000) K = 10000;
  std::size_t bad = 0;
  for (unsigned long k = 1; k <= K.get_ui(); ++k) {
    OstrowskiDigits d = ostrowski_int(mpz_class(k), t);
    mpz_class sum = 0;
    for (std::size_t n = 0; n < d.e.size(); ++n) sum += d.e[n] * t.q[n];
    if (sum != k || !digits_legal(d, t, true)) ++bad;
  }
  r.passed = bad == 0;
  r.detail["k_max"] = int_json(K);
  r.detail["failures"] = bad;
  return r;
}

SuiteResult suite_residue(const ConvergentTable& t, const Orbit& o, const OstrowskiDigits& d) {
  SuiteResult r;
  std::size_t bad = 0;
  for (std::size_t n = 0; n <= d.depth(); ++n)
    if (!residue_bound_check(o, d, t, n)) ++bad;
  r.passed = bad == 0;
  r.detail["n_max"] = d.depth();
  r.detail["failures"] = bad;
  return r;
}

SuiteResult suite_tail(const ConvergentTable& t) {
  SuiteResult r;
  std::size_t checks = 0, bad = 0;
  for (std::size_t n = 1; n <= 10; ++n)
    for (std::size_t terms = 1; terms <= 5 && n + 2 * terms <= t.depth(); ++terms) {
      ++checks;
      if (!alternating_tail_identity_check(t, n, terms).holds) ++bad;
    }
  r.passed = bad == 0;
  r.detail["checks"] = checks;
  r.detail["failures"] = bad;
  return r;
}

SuiteResult suite_inclusions(const ConvergentTable& t, const Orbit& o, const OstrowskiDigits& d, const Exponent& beta,
                             std::size_t n_max, const std::string& covering) {
  SuiteResult r;
  auto inc = verify_inclusions(o, t, d, beta, n_max, covering_rule(covering));
  r.passed = inc.holds();
  r.detail["n_max"] = n_max;
  r.detail["covering"] = covering;
  r.detail["kappa_in_D"] = inc.kappa_in_D;
  r.detail["D_covered"] = inc.D_covered;
  r.detail["nesting"] = inc.nesting;
  r.detail["violations"] = inc.violations;
  return r;
}

Result cmd_verify(const Config& c) {
  require_format(c, {"json"});
  static const std::vector<std::string> kSuites = {"lemma2", "spectrum", "ostrowski", "residue", "tail",
                                                   "inclusions"};
  const std::string& which = c.str("suite");
  std::vector<std::string> run;
  if (which == "all") {
    run = kSuites;
  } else {
    if (std::find(kSuites.begin(), kSuites.end(), which) == kSuites.end())
      throw UsageError("unknown suite '" + which + "'");
    run = {which};
  }
  auto t = build_table(c.alpha(), depth_of(c));
  const Exponent beta = c.beta();
  std::optional<Orbit> o;
  std::optional<OstrowskiDigits> d;
  std::size_t n_max = 0;
  auto need_digits = [&] {
    if (d) return;
    if (t.depth() < 4) throw UsageError("--depth must be at least 4 for residue and inclusion suites");
    n_max = std::min<std::size_t>(c.u64("n-max"), t.depth() - 3);
    o.emplace(t.alpha, parse_rho(c.str("rho"), t.alpha));
    d = rho_digits(c.str("rho"), *o, t, t.depth() - 1);
  };

  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "verify";
  j["alpha"] = t.alpha->str();
  j["beta"] = beta.str();
  j["depth"] = t.depth();
  j["rho"] = c.str("rho");
  Json suites = Json::array();
  bool all = true;
  for (const auto& s : run) {
    SuiteResult r;
    if (s == "lemma2") {
      r = suite_lemma2(t, beta, c.threads());
    } else if (s == "spectrum") {
      r = suite_spectrum(t);
    } else if (s == "ostrowski") {
      r = suite_ostrowski(t);
    } else if (s == "residue") {
      need_digits();
      r = suite_residue(t, *o, *d);
    } else if (s == "tail") {
      r = suite_tail(t);
    } else {
      need_digits();
      r = suite_inclusions(t, *o, *d, beta, n_max, c.str("covering"));
    }
    all = all && r.passed;
    Json e;
    e["suite"] = s;
    e["passed"] = r.passed;
    e["detail"] = r.detail;
    suites.push_back(e);
  }
  j["suites"] = suites;
  j["passed"] = all;
  return {j.dump(2), all ? kExitOk : kExitVerifyFailed};
}

// ---- command table --------------------------------------------------------

struct OptSpec {
  const char* name;
  const char* def;
  const char* help;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<OptSpec> opts;
  std::function<Result(const Config&)> run;
};

const OptSpec kAlpha{"alpha", "cf:[1;(1)]", "alpha spec: surd:a,b,d,c | cf:[a0;...] | rule:name:params | dec:D@n"};
const OptSpec kBeta{"beta", "1", "exponent beta (2, 0.5, 3/2)"};
const OptSpec kRho{"rho", "0/1", "rho: p/q | lin:c0,c1 | alpha spec | @digits.json"};
const OptSpec kDepth{"depth", "20", "convergent depth"};
const OptSpec kTol{"tol", "1e-3", "tolerance"};
const OptSpec kThreads{"threads", "1", "worker threads for scans"};
const OptSpec kDigits{"digits", "20", "significant digits in decimal output"};
const OptSpec kOut{"out", "-", "output path, - for stdout"};
const OptSpec kF{"F", "sin2pi", "periodic model: sin2pi | sin2pi-cubed"};
const OptSpec kGrowth{"growth", "none", "growth perturbation: none | inv-log"};

std::vector<OptSpec> with_common(std::vector<OptSpec> v, const char* format) {
  v.push_back(kDigits);
  v.push_back(kOut);
  v.push_back(OptSpec{"format", format, "output format"});
  return v;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = {
      {"cf", "partial quotients, convergents and signed errors", with_common({kAlpha, kDepth}, "csv"), cmd_cf},
      {"ostrowski", "integer or real Ostrowski digits",
       with_common({kAlpha, kDepth, {"k", "", "integer to expand (real digits of --rho otherwise)"}, kRho}, "json"),
       cmd_ostrowski},
      {"mu", "sign-filtered running minima of k^beta <k alpha - rho>",
       with_common({kAlpha, kBeta, kRho, {"N", "100000", "scan bound"}, kTol, kThreads}, "json"), cmd_mu},
      {"tau", "tau estimates from the digits of rho", with_common({kAlpha, kBeta, kRho, kDepth}, "json"), cmd_tau},
      {"scan", "y_k = g(k) F(k alpha) or w_k series, or a bin fill report",
       with_common({kF, kAlpha, kBeta, kGrowth, kRho, {"N", "10000", "last index"},
                    {"series", "y", "y (oscillator) or w (k^beta <k alpha - rho>)"}, {"H", "3", "fill half-width"},
                    {"bins", "60", "fill bins"}},
                   "csv"),
       cmd_scan},
      {"witness", "index k with k^beta <k alpha - rho> within tol of h",
       with_common({kAlpha, kBeta, {"rho", "1/3", kRho.help}, {"target", "1", "target value h"}, {"tol", "1/10", "tolerance"},
                    {"depth", "9", "convergent depth"}, {"scan-bound", "1000000", "scan bound for rational rho"}},
                   "json"),
       cmd_witness},
      {"bohr", "the subsequence set D, its covering sets and the filter check",
       with_common({kAlpha, kBeta, {"rho", "1/3", kRho.help}, kDepth, {"n-max", "6", "largest window level"},
                    {"covering", "stated", "stated | derived"}, {"N", "", "filter scan bound (empty: no filter)"},
                    {"H", "10", "filter level"}, {"max-hits", "0", "stop the filter after this many hits (0: all)"}},
                   "json"),
       cmd_bohr},
      {"build-rho", "construct rho realising targets at K_m(j)",
       with_common({kAlpha, {"beta", "2", kBeta.help}, {"depth", "40", "convergent depth"},
                    {"targets", "1", "comma separated rationals (use --targets=-1,2 for a leading sign)"},
                    {"case", "auto", "auto | case1 | case2 | case3"}, kTol},
                   "json"),
       cmd_build_rho},
      {"build-alpha", "rule-built alpha",
       with_common({{"type", "asym", "asym | liouville"}, {"beta", "2", kBeta.help}, {"C", "1", "asym constant"},
                    {"n-max", "20", "requested depth"}, {"swap", "false", "asym: large quotients at even n"}},
                   "json"),
       cmd_build_alpha},
      {"classify", "density verdict for g(k) F(k alpha)",
       with_common({kF, kAlpha, kBeta, kGrowth, {"N", "100000", "scan bound for irrational roots"}, kTol,
                    {"depth", "40", "largest convergent depth"}, {"fill-N", "0", "also emit a fill report to this N"},
                    {"H", "3", "fill half-width"}, {"bins", "60", "fill bins"}},
                   "json"),
       cmd_classify},
      {"verify", "property suites: lemma2 spectrum ostrowski residue tail inclusions | all",
       with_common({{"suite", "all", "suite name or all"}, kAlpha, kBeta, {"depth", "10", "convergent depth"},
                    {"rho", "1/3", kRho.help}, {"n-max", "6", "inclusion level (capped at depth - 3)"},
                    {"covering", "derived", "covering sets for inclusions: derived | stated"}, kThreads},
                   "json"),
       cmd_verify},
  };
  return cmds;
}

const Command& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (name == c.name) return c;
  throw UsageError("unknown subcommand '" + name + "'");
}

int emit(const Config& cfg, const Result& r) {
  const std::string& out = cfg.str("out");
  std::string text = r.text;
  if (text.empty() || text.back() != '\n') text += '\n';
  if (out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw UsageError("cannot write " + out);
    f << text;
  }
  return r.code;
}

int execute(const Config& cfg, bool emit_config) {
  const Command& cmd = find_command(cfg.subcommand);
  if (emit_config) {
    std::cout << config_json(cfg).dump(2) << '\n';
    return kExitOk;
  }
  return emit(cfg, cmd.run(cfg));
}

Config config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("schema", "") != kSchemaVersion)
    throw UsageError(std::string("config schema must be ") + kSchemaVersion);
  Config c;
  c.subcommand = j.value("subcommand", "");
  const Command& cmd = find_command(c.subcommand);
  for (const auto& o : cmd.opts) c.values[o.name] = o.def;
  if (j.contains("options")) {
    for (const auto& [k, v] : j["options"].items()) {
      if (!c.values.count(k)) throw UsageError("config option '" + k + "' is not defined for " + c.subcommand);
      if (!v.is_string()) throw UsageError("config option '" + k + "' must be a string");
      c.values[k] = v.get<std::string>();
    }
  }
  return c;
}

int run(int argc, char** argv) {
  CLI::App app{"oscillate: certified experiments on k^beta <k alpha - rho>_2 and g(k) F(k alpha)"};
  app.require_subcommand(0, 1);
  std::string config_path;
  bool emit_config = false;
  app.add_option("--config", config_path, "run the subcommand stored in a JSON config");
  app.add_flag("--emit-config", emit_config, "print the effective config instead of running");

  std::map<std::string, std::map<std::string, std::string>> store;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->fallthrough();
    subs[cmd.name] = sub;
    auto& vals = store[cmd.name];
    for (const auto& o : cmd.opts) {
      vals[o.name] = o.def;
      sub->add_option(std::string("--") + o.name, vals[o.name], o.help)->default_str(o.def);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diagnostic("usage", "parse", e.what());
    return kExitUsage;
  }

  Config cfg;
  if (!config_path.empty()) {
    if (!app.get_subcommands().empty()) throw UsageError("--config cannot be combined with a subcommand");
    cfg = config_from_json(read_file(config_path));
  } else {
    if (app.get_subcommands().empty()) throw UsageError("no subcommand given; see --help");
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.values = store[cfg.subcommand];
  }
  return execute(cfg, emit_config);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    diagnostic("usage", "invalid-argument", e.what());
  } catch (const osc::Error& e) {
    diagnostic("numeric", osc::error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    diagnostic("internal", "exception", e.what());
  }
  return kExitUsage;
}
