#include "osc/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "osc/cf_engine.hpp"
#include "osc/error.hpp"
#include "osc/fast_orbit.hpp"
#include "osc/json_io.hpp"
#include "osc/mu_tau.hpp"
#include "osc/ostrowski.hpp"

namespace osc {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

PeriodicRoot root_at(const char* r, double c, const char* gamma) {
  return PeriodicRoot{Rho::parse(r), c, Exponent::parse(gamma)};
}

// |F'| bounds for the registered models, used in the sample error.
double lipschitz(const PeriodicModel& F) {
  if (F.name == "sin2pi") return kTwoPi;
  if (F.name == "sin2pi-cubed") return 3 * kTwoPi;
  return 0;
}

}  // namespace

PeriodicModel periodic_model(std::string_view name) {
  if (name == "sin2pi")
    return PeriodicModel{"sin2pi", {root_at("0", kTwoPi, "1"), root_at("1/2", -kTwoPi, "1")},
                         [](double x) { return std::sin(kTwoPi * x); }};
  if (name == "sin2pi-cubed") {
    const double c = kTwoPi * kTwoPi * kTwoPi;
    return PeriodicModel{"sin2pi-cubed", {root_at("0", c, "3"), root_at("1/2", -c, "3")}, [](double x) {
                           double s = std::sin(kTwoPi * x);
                           return s * s * s;
                         }};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown periodic model '" + std::string(name) + "'");
}

std::vector<std::string> periodic_model_names() { return {"sin2pi", "sin2pi-cubed"}; }

GrowthSpec GrowthSpec::with_perturbation(const Exponent& beta, std::string_view name) {
  if (name == "none") return power(beta);
  if (name == "inv-log") return GrowthSpec{beta, "inv-log", [](double t) { return 1 / std::log(t + 2); }};
  throw Error(ErrorCode::InvalidArgument, "unknown perturbation '" + std::string(name) + "'");
}

double GrowthSpec::operator()(double t) const {
  double p = std::pow(t, beta.to_double());
  return u ? p * (1 + u(t)) : p;
}

void eval_sequence(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha, std::uint64_t k1,
                   std::uint64_t k2, const std::function<void(const SequenceSample&)>& out) {
  Orbit o(alpha, Rho::rational(0));
  FastOrbit fo(o);
  if (k2 > fo.safe_limit())
    throw Error(ErrorCode::PrecisionCapExceeded, "k beyond the fixed-point range of this alpha");
  const double L = lipschitz(F);
  if (k1 < 1) k1 = 1;
  FastOrbit::u128 x = fo.raw(k1);
  for (std::uint64_t k = k1; k <= k2; ++k, x += fo.step()) {
    double frac = FastOrbit::unsigned_double(x);
    double gk = g(static_cast<double>(k));
    double y = gk * F.F(frac);
    double ferr = std::ldexp(static_cast<double>(fo.error_units(k)), -128) + 0x1p-53;
    out(SequenceSample{k, y, gk * L * ferr + std::fabs(y) * 0x1p-50});
    if (k == k2) break;
  }
}

std::vector<SequenceSample> eval_sequence(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha,
                                          std::uint64_t k1, std::uint64_t k2) {
  std::vector<SequenceSample> v;
  eval_sequence(g, F, alpha, k1, k2, [&](const SequenceSample& s) { v.push_back(s); });
  return v;
}

void root_local_values(const PeriodicModel& F, std::size_t root, const AlphaPtr& alpha, const Exponent& beta,
                       std::uint64_t k1, std::uint64_t k2, const std::function<void(const RootLocalSample&)>& out) {
  if (root >= F.roots.size()) throw Error(ErrorCode::IndexOutOfRange, "no such root");
  const PeriodicRoot& R = F.roots[root];
  Orbit o(alpha, R.r);
  FastOrbit fo(o);
  if (k2 > fo.safe_limit())
    throw Error(ErrorCode::PrecisionCapExceeded, "k beyond the fixed-point range of this alpha");
  const double b = beta.to_double(), gam = R.gamma.to_double();
  if (k1 < 1) k1 = 1;
  FastOrbit::u128 x = fo.raw(k1);
  for (std::uint64_t k = k1; k <= k2; ++k, x += fo.step()) {
    double s = FastOrbit::to_double(x);
    double d = std::fabs(s);
    double v = R.c * (s < 0 ? -1.0 : 1.0) * std::pow(static_cast<double>(k), b) * std::pow(d, gam);
    out(RootLocalSample{k, v, d});
    if (k == k2) break;
  }
}

const char* side_verdict_name(SideVerdict v) {
  switch (v) {
    case SideVerdict::DenseIffConditionMet: return "dense-iff-condition-met";
    case SideVerdict::DenseBySufficiency: return "dense-by-sufficiency";
    case SideVerdict::NotDenseByNecessity: return "not-dense-by-necessity";
    case SideVerdict::DenseByCorollary2: return "dense-by-corollary2";
    case SideVerdict::Undecided: return "undecided";
  }
  return "undecided";
}

namespace {

std::size_t working_depth(const AlphaPtr& alpha, const ClassifyOptions& opt) {
  std::size_t depth = 1;
  for (std::size_t n = 2; n <= opt.max_depth; ++n) {
    try {
      if (mpz_sizeinbase(alpha->q(n).get_mpz_t(), 2) > opt.max_q_bits) break;
    } catch (const Error&) {
      break;
    }
    depth = n;
  }
  return depth;
}

enum class RootState { Met, Bounded, Open };

struct RootOutcome {
  RootState state = RootState::Open;
  std::optional<CertifiedReal> evidence;
  double bound = 0;
};

// Rational root p/q: tail minima of q_n^b ||q_n alpha|| over q | q_n of the side's parity.
RootOutcome rational_root(const ConvergentTable& t, const PeriodicRoot& R, const Exponent& b, int side,
                          double tol) {
  RootOutcome out;
  const std::size_t depth = t.depth(), from = depth / 2, split = depth - depth / 4;
  const Parity par = side > 0 ? Parity::Even : Parity::Odd;
  const mpz_class q = R.r.rational_value().get_den();
  auto tail = convergent_mu(t, b, par, q, depth, from);
  if (!tail) {
    // no qualifying convergent in the tail: the condition cannot hold, floor unknown
    out.state = RootState::Bounded;
    out.bound = NAN;
    return out;
  }
  out.evidence = tail->value;
  if (tail->value.upper() <= tol) {
    out.state = RootState::Met;
    return out;
  }
  // bounded only if the later half of the tail does not keep falling
  auto early = split > from ? convergent_mu(t, b, par, q, split - 1, from) : std::nullopt;
  auto late = convergent_mu(t, b, par, q, depth, split);
  if (early && late && late->value.approx() < 0.5 * early->value.approx()) return out;
  out.state = RootState::Bounded;
  // k = q_n / q realises the convergent value scaled down by q^(1+b)
  double mu = tail->value.approx() / std::pow(q.get_d(), 1 + b.to_double());
  out.bound = std::fabs(R.c) * std::pow(mu, R.gamma.to_double());
  return out;
}

RootOutcome irrational_root(const ConvergentTable& t, const PeriodicRoot& R, const Exponent& b, int side,
                            const ClassifyOptions& opt) {
  RootOutcome out;
  Orbit o(t.alpha, R.r);
  const std::size_t upto = t.depth() - 1;
  OstrowskiDigits d = ostrowski_real(o, t, upto);
  TauEstimate tau = tau_estimate(t, b, d, upto);
  const auto& ts = side > 0 ? tau.tau_plus_upper : tau.tau_minus_upper;
  out.evidence = ts;
  if (ts && ts->upper() <= opt.tol) {
    out.state = RootState::Met;
    return out;
  }
  MuEstimate est = estimate_mu(scan_mu(o, b, opt.N), opt.tol);
  const auto& mu = side > 0 ? est.mu_plus_upper : est.mu_minus_upper;
  VerdictHint hint = side > 0 ? est.hint_plus : est.hint_minus;
  if (hint == VerdictHint::BoundedBelow && mu) {
    out.state = RootState::Bounded;
    out.evidence = mu;
    out.bound = std::fabs(R.c) * std::pow(mu->approx(), R.gamma.to_double());
  }
  return out;
}

SideReport classify_side(const GrowthSpec& g, const PeriodicModel& F, const ConvergentTable& t, int sigma,
                         const ClassifyOptions& opt) {
  SideReport rep;
  rep.evidence.resize(F.roots.size());
  for (std::size_t i = 0; i < F.roots.size(); ++i) {
    if (g.beta.value() < F.roots[i].gamma.value()) {
      rep.verdict = SideVerdict::DenseByCorollary2;
      rep.witness_root = i;
      rep.condition = "beta/gamma<1";
      rep.clause = "beta < 1 with a bounded-type alpha";
      return rep;
    }
  }
  std::optional<std::size_t> met_rational, met_irrational;
  bool all_bounded = true;
  double bound = INFINITY;
  for (std::size_t i = 0; i < F.roots.size(); ++i) {
    const PeriodicRoot& R = F.roots[i];
    Exponent b(g.beta.value() / R.gamma.value());
    const int side = sigma * (R.c > 0 ? 1 : -1);
    RootOutcome o = R.rational() ? rational_root(t, R, b, side, opt.tol) : irrational_root(t, R, b, side, opt);
    rep.evidence[i] = o.evidence;
    if (o.state == RootState::Met) {
      auto& slot = R.rational() ? met_rational : met_irrational;
      if (!slot) slot = i;
    }
    if (o.state != RootState::Bounded) all_bounded = false;
    else if (std::isnan(o.bound) || std::isnan(bound)) bound = NAN;
    else bound = std::min(bound, o.bound);
  }
  auto cond = [&](std::size_t i, const char* kind) {
    const int side = sigma * (F.roots[i].c > 0 ? 1 : -1);
    return std::string(kind) + (side > 0 ? "+" : "-");
  };
  if (met_rational) {
    rep.verdict = SideVerdict::DenseIffConditionMet;
    rep.witness_root = met_rational;
    rep.condition = cond(*met_rational, "mu");
    rep.clause = "rational root: mu vanishes";
  } else if (met_irrational) {
    rep.verdict = SideVerdict::DenseBySufficiency;
    rep.witness_root = met_irrational;
    rep.condition = cond(*met_irrational, "tau");
    rep.clause = "irrational root: tau vanishes";
  } else if (all_bounded && !F.roots.empty()) {
    rep.verdict = SideVerdict::NotDenseByNecessity;
    if (!std::isnan(bound)) rep.bound = bound;
    rep.clause = "no root has vanishing mu on this side";
  } else {
    rep.clause = "no clause decides at this depth";
  }
  return rep;
}

}  // namespace

DensityVerdict classify_density(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha,
                                const ClassifyOptions& opt) {
  if (sgn(g.beta.value()) <= 0) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  DensityVerdict v;
  v.tol = opt.tol;
  v.N = opt.N;
  v.depth = working_depth(alpha, opt);
  ConvergentTable t = build_table(alpha, v.depth);
  v.positive = classify_side(g, F, t, 1, opt);
  v.negative = classify_side(g, F, t, -1, opt);
  return v;
}

FillAccumulator::FillAccumulator(double H, std::size_t bins) {
  if (!(H > 0) || bins < 1) throw Error(ErrorCode::InvalidArgument, "need H > 0 and at least one bin");
  r_.H = H;
  r_.bins = bins;
  r_.counts.assign(bins, 0);
}

void FillAccumulator::add(double y, double err) {
  r_.max_error = std::max(r_.max_error, err);
  if (!(y >= -r_.H && y <= r_.H)) {
    ++r_.outside;
    return;
  }
  auto i = static_cast<std::size_t>((y + r_.H) / (2 * r_.H) * static_cast<double>(r_.bins));
  if (i >= r_.bins) i = r_.bins - 1;
  ++r_.counts[i];
}

void FillAccumulator::merge(const FillAccumulator& o) {
  for (std::size_t i = 0; i < r_.bins; ++i) r_.counts[i] += o.r_.counts[i];
  r_.outside += o.r_.outside;
  r_.max_error = std::max(r_.max_error, o.r_.max_error);
}

FillReport FillAccumulator::report() const {
  FillReport r = r_;
  std::size_t run = 0, widest = 0;
  for (auto c : r.counts) {
    if (c == 0) {
      ++r.empty_bins;
      widest = std::max(widest, ++run);
    } else {
      run = 0;
    }
  }
  r.max_empty_gap = static_cast<double>(widest) * 2 * r.H / static_cast<double>(r.bins);
  return r;
}

FillReport empirical_density(const std::vector<double>& values, double H, std::size_t bins) {
  FillAccumulator acc(H, bins);
  for (double y : values) acc.add(y);
  return acc.report();
}

FillReport empirical_density(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha, std::uint64_t N,
                             double H, std::size_t bins) {
  FillAccumulator acc(H, bins);
  eval_sequence(g, F, alpha, 1, N, [&](const SequenceSample& s) { acc.add(s.y, s.err); });
  return acc.report();
}

namespace {

Json side_json(const SideReport& s, const PeriodicModel& F, int digits) {
  Json j;
  j["verdict"] = side_verdict_name(s.verdict);
  j["witness_root"] = s.witness_root ? Json(F.roots[*s.witness_root].r.str()) : Json(nullptr);
  j["condition"] = s.condition.empty() ? Json(nullptr) : Json(s.condition);
  j["clause"] = s.clause;
  Json ev = Json::object();
  for (std::size_t i = 0; i < F.roots.size() && i < s.evidence.size(); ++i)
    ev[F.roots[i].r.str()] = ball_json(s.evidence[i], digits);
  j["evidence"] = ev;
  if (s.bound) {
    std::ostringstream b;
    b.precision(12);
    b << *s.bound;
    j["bound"] = b.str();
  } else {
    j["bound"] = nullptr;
  }
  return j;
}

}  // namespace

std::string verdict_json(const DensityVerdict& v, const PeriodicModel& F, int digits) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "verdict";
  j["model"] = F.name;
  j["tol"] = v.tol;
  j["depth"] = v.depth;
  j["N"] = v.N;
  j["positive"] = side_json(v.positive, F, digits);
  j["negative"] = side_json(v.negative, F, digits);
  return j.dump(2);
}

std::string fill_json(const FillReport& r) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "fill";
  j["H"] = r.H;
  j["bins"] = r.bins;
  j["counts"] = r.counts;
  j["outside"] = r.outside;
  j["empty_bins"] = r.empty_bins;
  j["max_empty_gap"] = r.max_empty_gap;
  j["max_error"] = r.max_error;
  return j.dump(2);
}

std::string sequence_csv(const std::vector<SequenceSample>& s) {
  std::ostringstream o;
  o.precision(17);
  o << "k,y,err\n";
  for (const auto& x : s) o << x.k << ',' << x.y << ',' << x.err << '\n';
  return o.str();
}

}  // namespace osc
