#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "osc/alpha.hpp"
#include "osc/certified_real.hpp"
#include "osc/orbit.hpp"

namespace osc {

// A root r of F with F(r + x) ~ c * sign(x) * |x|^gamma.
struct PeriodicRoot {
  Rho r;  // rational, or an AlphaSpec-relative / independent irrational
  double c = 0;
  Exponent gamma;
  bool rational() const { return r.is_rational(); }
};

struct PeriodicModel {
  std::string name;
  std::vector<PeriodicRoot> roots;
  std::function<double(double)> F;  // period 1
};

// Registered models: "sin2pi" and "sin2pi-cubed".
PeriodicModel periodic_model(std::string_view name);
std::vector<std::string> periodic_model_names();

// g(t) = t^beta * (1 + u(t)).
struct GrowthSpec {
  Exponent beta;
  std::string u_name = "none";  // "none" or "inv-log" (u = 1/log(t + 2))
  std::function<double(double)> u;

  static GrowthSpec power(const Exponent& beta) { return GrowthSpec{beta, "none", nullptr}; }
  static GrowthSpec with_perturbation(const Exponent& beta, std::string_view name);
  double operator()(double t) const;
};

struct SequenceSample {
  std::uint64_t k = 0;
  double y = 0;
  double err = 0;  // bound on |y - g(k) F({k alpha})| from rounding {k alpha}
};

// y_k = g(k) F({k alpha}) for k in [k1, k2]; {k alpha} comes from fixed-point stepping.
void eval_sequence(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha, std::uint64_t k1,
                   std::uint64_t k2, const std::function<void(const SequenceSample&)>& out);
std::vector<SequenceSample> eval_sequence(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha,
                                          std::uint64_t k1, std::uint64_t k2);

struct RootLocalSample {
  std::uint64_t k = 0;
  double v = 0;     // c * sign(x) * k^beta * |x|^gamma, x = <k alpha - r>_2
  double dist = 0;  // |x|
};
void root_local_values(const PeriodicModel& F, std::size_t root, const AlphaPtr& alpha, const Exponent& beta,
                       std::uint64_t k1, std::uint64_t k2, const std::function<void(const RootLocalSample&)>& out);

enum class SideVerdict { DenseIffConditionMet, DenseBySufficiency, NotDenseByNecessity, DenseByCorollary2, Undecided };
const char* side_verdict_name(SideVerdict v);

struct SideReport {
  SideVerdict verdict = SideVerdict::Undecided;
  std::optional<std::size_t> witness_root;
  std::string condition;  // "mu+", "mu-", "tau+", "tau-", "beta/gamma<1", or empty
  std::string clause;     // which statement fired
  // Evidence per root: the convergent (rational) or tau / scan (irrational) value used.
  std::vector<std::optional<CertifiedReal>> evidence;
  std::optional<double> bound;  // |y| floor on this side for not-dense verdicts: min |c| mu^gamma
};

struct DensityVerdict {
  SideReport positive, negative;
  double tol = 1e-3;
  std::size_t depth = 0;
  std::uint64_t N = 0;
};

struct ClassifyOptions {
  std::uint64_t N = 100000;  // scan bound for irrational roots
  double tol = 1e-3;
  std::size_t max_depth = 40;
  std::size_t max_q_bits = 65536;
};

DensityVerdict classify_density(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha,
                                const ClassifyOptions& opt = {});

struct FillReport {
  double H = 0;
  std::size_t bins = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t outside = 0;
  std::size_t empty_bins = 0;
  double max_empty_gap = 0;  // widest run of empty bins
  double max_error = 0;      // largest reported sample error
};

class FillAccumulator {
 public:
  FillAccumulator(double H, std::size_t bins);
  void add(double y, double err = 0);
  void merge(const FillAccumulator& o);
  FillReport report() const;

 private:
  FillReport r_;
};

FillReport empirical_density(const std::vector<double>& values, double H, std::size_t bins);
FillReport empirical_density(const GrowthSpec& g, const PeriodicModel& F, const AlphaPtr& alpha, std::uint64_t N,
                             double H, std::size_t bins);

std::string verdict_json(const DensityVerdict& v, const PeriodicModel& F, int digits = 20);
std::string fill_json(const FillReport& r);
std::string sequence_csv(const std::vector<SequenceSample>& s);

}  // namespace osc
