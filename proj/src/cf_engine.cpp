#include "osc/cf_engine.hpp"

#include <sstream>

#include "osc/error.hpp"

namespace osc {

namespace {

mpz_class floor_of(const mpq_class& x) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

std::vector<mpz_class> exact_cf(mpq_class x, std::size_t limit) {
  std::vector<mpz_class> out;
  while (out.size() < limit) {
    mpz_class a = floor_of(x);
    out.push_back(a);
    x -= a;
    if (sgn(x) == 0) break;
    x = 1 / x;
  }
  return out;
}

// Decimal alphas cannot be evaluated arbitrarily far; back off until they can.
CertifiedReal eval_err(const Alpha& alpha, const mpz_class& p, const mpz_class& q, long bits) {
  for (long b = bits;; b /= 2) {
    try {
      return alpha.eval_form(mpq_class(-p), mpq_class(q), b);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PrecisionExhausted || b < 8) throw;
    }
  }
}

}  // namespace

const SignedFrac& ConvergentTable::err_at(std::size_t n) const {
  if (n < 1 || n > err.size()) throw Error(ErrorCode::IndexOutOfRange, "err index " + std::to_string(n));
  return err[n - 1];
}

LinForm ConvergentTable::err_form(std::size_t n) const {
  if (n > depth()) throw Error(ErrorCode::IndexOutOfRange, "table index " + std::to_string(n));
  return LinForm{mpq_class(-p[n]), mpq_class(q[n]), 0};
}

LinForm ConvergentTable::theta_form(std::size_t n) const {
  LinForm f = err_form(n);
  return n % 2 == 0 ? f : -f;
}

ConvergentTable build_table(const AlphaPtr& alpha, std::size_t N, long bits) {
  ConvergentTable t;
  t.alpha = alpha;
  for (std::size_t n = 0; n <= N; ++n) {
    t.a.push_back(alpha->quotient(n));
    t.p.push_back(alpha->p(n));
    t.q.push_back(alpha->q(n));
  }
  for (std::size_t n = 1; n <= N; ++n) {
    CertifiedReal v = eval_err(*alpha, t.p[n], t.q[n], bits);
    int s = alpha->sign_of(mpq_class(-t.p[n]), mpq_class(t.q[n]));
    if (s != ConvergentTable::parity_sign(n))
      throw Error(ErrorCode::InvalidArgument, "convergent error sign breaks parity at n=" + std::to_string(n));
    if (!(v.upper() < mpq_class(1, 2)) || !(v.lower() > mpq_class(-1, 2)))
      throw Error(ErrorCode::PrecisionExhausted, "cannot certify |<q_n alpha>_2| < 1/2 at n=" + std::to_string(n));
    t.err.push_back(SignedFrac{v, s, t.p[n]});
  }
  return t;
}

TailIdentity alternating_tail_identity_check(const ConvergentTable& table, std::size_t n, std::size_t terms) {
  if (n < 1 || terms < 1 || n + 2 * terms > table.depth())
    throw Error(ErrorCode::IndexOutOfRange, "need 1 <= n and n + 2*terms <= depth");
  LinForm r = table.err_form(n);
  for (std::size_t i = 1; i <= terms; ++i) r += table.err_form(n + 2 * i - 1) * mpq_class(table.a[n + 2 * i]);
  TailIdentity out;
  out.residual_form = r;
  const Alpha& a = *table.alpha;
  out.residual = a.eval_form(r.c0, r.c1, 256);
  LinForm bound = table.theta_form(n + 2 * terms - 1);
  out.bound = a.eval_form(bound.c0, bound.c1, 256);
  // |r| <= bound  <=>  bound - r >= 0 and bound + r >= 0
  LinForm d1 = bound - r, d2 = bound + r;
  out.holds = a.sign_of(d1.c0, d1.c1) >= 0 && a.sign_of(d2.c0, d2.c1) >= 0;
  return out;
}

std::vector<mpz_class> cf_prefix_from_enclosure(const CertifiedReal& x, std::size_t limit) {
  auto lo = exact_cf(x.lower(), limit);
  auto hi = exact_cf(x.upper(), limit);
  std::size_t common = 0;
  while (common < lo.size() && common < hi.size() && lo[common] == hi[common]) ++common;
  if (common > 0) --common;
  return {lo.begin(), lo.begin() + static_cast<std::ptrdiff_t>(common)};
}

std::string table_csv(const ConvergentTable& table, int digits) {
  std::ostringstream os;
  os << "n,a_n,p_n,q_n,signed_err,radius\n";
  for (std::size_t n = 0; n <= table.depth(); ++n) {
    os << n << ',' << table.a[n] << ',' << table.p[n] << ',' << table.q[n] << ',';
    if (n == 0) {
      os << ",\n";
    } else {
      const auto& e = table.err_at(n);
      os << e.value.decimal(digits) << ',' << e.value.radius_string() << '\n';
    }
  }
  return os.str();
}

}  // namespace osc
