#include "osc/ostrowski.hpp"

#include "osc/error.hpp"
#include "osc/json_io.hpp"

namespace osc {

namespace {

long bits_for(const mpz_class& q) { return 64 + 2 * static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2)); }

mpz_class floor_of(const mpq_class& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

// floor(x / y) for y > 0, decided exactly.
mpz_class floor_ratio(const Orbit& o, const LinForm& x, const LinForm& y, long bits) {
  for (long b = bits;; b *= 2) {
    CertifiedReal xv = o.eval(x, b), yv = o.eval(y, b);
    if (!(yv.lower() > 0)) continue;
    mpz_class m = floor_of(xv.center() / yv.center());
    for (int step = 0; step < 4; ++step) {
      int lo = o.sign(x - y * mpq_class(m));
      if (lo < 0) {
        m -= 1;
        continue;
      }
      if (o.sign(x - y * mpq_class(m + 1)) >= 0) {
        m += 1;
        continue;
      }
      return m;
    }
    if (b > 1 << 26) throw Error(ErrorCode::AmbiguousDigit, "cannot locate digit");
  }
}

}  // namespace

std::string digit_violation(const OstrowskiDigits& d, const ConvergentTable& t, bool couple_index0) {
  std::size_t N = d.depth();
  if (N + 1 > t.depth() && !d.e.empty()) {
    // The last bound needs a_{N+1}; allow a table one shorter for integer use.
    if (N > t.depth()) return "digits deeper than table";
  }
  for (std::size_t n = 0; n < d.e.size(); ++n) {
    const mpz_class& e = d.e[n];
    if (e < 0) return "e_" + std::to_string(n) + " < 0";
    if (n + 1 > t.depth()) continue;
    const mpz_class& a = t.a[n + 1];
    if (n == 0 && e > a - 1) return "e_0 > a_1 - 1";
    if (n >= 1 && e > a) return "e_" + std::to_string(n) + " > a_" + std::to_string(n + 1);
    if (n + 1 < d.e.size() && n + 2 <= t.depth() && (n >= 1 || couple_index0) && d.e[n + 1] == t.a[n + 2] &&
        e != 0)
      return "e_" + std::to_string(n + 1) + " = a_" + std::to_string(n + 2) + " but e_" + std::to_string(n) + " != 0";
  }
  return {};
}

OstrowskiDigits ostrowski_int(const mpz_class& k, const ConvergentTable& t) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "ostrowski_int needs k >= 0");
  std::size_t N = t.depth();
  // q_{N+1} is needed to certify the range; the alpha object extends lazily.
  mpz_class q_next = t.alpha->q(N + 1);
  if (k >= q_next) throw Error(ErrorCode::IndexOutOfRange, "k >= q_{N+1}; table too shallow");
  OstrowskiDigits d;
  d.alpha = t.alpha->str();
  d.e.assign(N + 1, 0);
  mpz_class r = k;
  for (std::size_t j = N + 1; j-- > 0;) {
    if (t.q[j] <= r) {
      d.e[j] = r / t.q[j];
      r -= d.e[j] * t.q[j];
    }
  }
  return d;
}

void normalize_carries(OstrowskiDigits& d, const ConvergentTable& t) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t n = 1; n + 2 < d.e.size() && n + 2 <= t.depth(); ++n) {
      if (d.e[n + 1] == t.a[n + 2] && d.e[n] > 0) {
        d.e[n] -= 1;
        d.e[n + 1] = 0;
        d.e[n + 2] += 1;
        changed = true;
      }
    }
  }
}

OstrowskiDigits ostrowski_real(const Orbit& o, const ConvergentTable& t, std::size_t N) {
  if (t.depth() < N + 1) throw Error(ErrorCode::IndexOutOfRange, "table depth must be >= N + 1");
  std::size_t M = std::min(N + 2, t.depth() - 1);
  OstrowskiDigits d;
  d.alpha = t.alpha->str();
  LinForm frac_alpha = t.err_form(0);
  d.rho0 = o.floor(o.rho().form + frac_alpha);
  LinForm r = o.rho().form - LinForm::constant(mpq_class(d.rho0));
  for (std::size_t m = 0; m <= M; ++m) {
    LinForm theta = t.theta_form(m), next = t.theta_form(m + 1);
    LinForm rt = r * mpq_class(ConvergentTable::parity_sign(m));
    mpz_class e = floor_ratio(o, rt, theta, bits_for(t.q[std::min(m + 1, t.depth())]));
    LinForm rem = rt - theta * mpq_class(e);
    int c = o.sign(rem - next);
    if (c == 0 && o.sign(rem) != 0)
      throw Error(ErrorCode::BoundaryCase,
                  "rho lies in Z*alpha + Z: remainder meets the interval endpoint at n=" + std::to_string(m));
    if (c > 0) e += 1;
    if (e < 0) e = 0;
    d.e.push_back(e);
    r -= t.err_form(m) * mpq_class(e);
  }
  normalize_carries(d, t);
  d.e.resize(N + 1);
  return d;
}

LinForm reconstruct_form(const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n) {
  LinForm f = LinForm::constant(mpq_class(d.rho0));
  for (std::size_t j = 0; j <= n && j < d.e.size(); ++j)
    if (sgn(d.e[j]) != 0) f += t.err_form(j) * mpq_class(d.e[j]);
  return f;
}

CertifiedReal reconstruct(const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n, long bits) {
  LinForm f = reconstruct_form(d, t, n);
  return t.alpha->eval_form(f.c0, f.c1, bits);
}

bool residue_bound_check(const Orbit& o, const OstrowskiDigits& d, const ConvergentTable& t, std::size_t n) {
  LinForm diff = o.rho().form - reconstruct_form(d, t, n);
  LinForm bound = t.theta_form(n);
  return o.sign(bound - diff) >= 0 && o.sign(bound + diff) >= 0;
}

std::vector<mpz_class> kappa_seq(const OstrowskiDigits& d, const ConvergentTable& t) {
  std::vector<mpz_class> k;
  mpz_class acc = 0;
  for (std::size_t n = 0; n < d.e.size(); ++n) {
    if (n > t.depth()) throw Error(ErrorCode::IndexOutOfRange, "digits deeper than table");
    acc += d.e[n] * t.q[n];
    k.push_back(acc);
  }
  return k;
}

Rho digits_rho(const OstrowskiDigits& d, const ConvergentTable& t) {
  return Rho::from_form(reconstruct_form(d, t, d.depth()));
}

std::string digits_to_json(const OstrowskiDigits& d) {
  Json j;
  j["rho0"] = int_json(d.rho0);
  Json arr = Json::array();
  for (const auto& v : d.e) arr.push_back(int_json(v));
  j["digits"] = arr;
  j["alpha"] = d.alpha;
  return j.dump();
}

OstrowskiDigits digits_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("digit JSON: ") + ex.what());
  }
  auto to_mpz = [](const nlohmann::json& v) {
    if (v.is_number_integer()) return mpz_class(std::to_string(v.get<long long>()), 10);
    if (v.is_string()) return mpz_class(v.get<std::string>(), 10);
    throw Error(ErrorCode::Parse, "digit JSON: integers expected");
  };
  if (!j.contains("rho0") || !j.contains("digits") || !j.contains("alpha"))
    throw Error(ErrorCode::Parse, "digit JSON needs rho0, digits, alpha");
  OstrowskiDigits d;
  d.rho0 = to_mpz(j["rho0"]);
  for (const auto& v : j["digits"]) d.e.push_back(to_mpz(v));
  d.alpha = j["alpha"].get<std::string>();
  return d;
}

}  // namespace osc
