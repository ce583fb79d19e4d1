#include "osc/fast_orbit.hpp"

#include "osc/error.hpp"

namespace osc {

namespace {

using u128 = FastOrbit::u128;

u128 low128(const mpz_class& v) {
  mpz_class m = v;
  mpz_fdiv_r_2exp(m.get_mpz_t(), m.get_mpz_t(), 128);
  mpz_class hi, lo;
  mpz_fdiv_q_2exp(hi.get_mpz_t(), m.get_mpz_t(), 64);
  mpz_fdiv_r_2exp(lo.get_mpz_t(), m.get_mpz_t(), 64);
  return (static_cast<u128>(hi.get_ui()) << 64) | static_cast<u128>(lo.get_ui());
}

u128 saturate(const mpz_class& v) {
  if (mpz_sizeinbase(v.get_mpz_t(), 2) >= 127) return static_cast<u128>(1) << 126;
  return low128(v);
}

// round(frac(f) * 2^128) with its error bound in units of 2^-128.
void fixed_point(const Orbit& o, const LinForm& f, u128& value, u128& err) {
  if (f.is_rational()) {
    mpq_class x = f.c0;
    mpz_class scaled;
    mpq_class s = x * mpq_class(mpz_class(1) << 128);
    mpz_fdiv_q(scaled.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
    value = low128(scaled);
    err = 1;
    return;
  }
  LinForm g = f - LinForm::constant(mpq_class(o.floor(f)));
  for (long bits : {140L, 100L, 80L, 64L, 48L, 32L, 20L}) {
    try {
      CertifiedReal v = o.eval(g, bits);
      mpq_class scale(mpz_class(1) << 128);
      mpq_class c = v.center() * scale;
      mpz_class r;
      mpz_fdiv_q(r.get_mpz_t(), c.get_num_mpz_t(), c.get_den_mpz_t());
      mpq_class rad = v.radius() * scale;
      mpz_class e;
      mpz_cdiv_q(e.get_mpz_t(), rad.get_num_mpz_t(), rad.get_den_mpz_t());
      value = low128(r);
      err = saturate(e + 1);
      return;
    } catch (const Error& ex) {
      if (ex.code() != ErrorCode::PrecisionExhausted) throw;
    }
  }
  throw Error(ErrorCode::PrecisionExhausted, "alpha/rho too coarse for fixed-point stepping");
}

}  // namespace

FastOrbit::FastOrbit(const Orbit& orbit) : orbit_(&orbit) {
  fixed_point(orbit, LinForm::alpha_times(1), A_, errA_);
  fixed_point(orbit, orbit.rho().form, R_, errR_);
  u128 budget = static_cast<u128>(1) << 100;
  if (errR_ >= budget) {
    safe_limit_ = 0;
  } else {
    u128 lim = (budget - errR_) / errA_;
    safe_limit_ = lim > static_cast<u128>(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(lim);
  }
}

int FastOrbit::certain_sign(u128 x, u128 err) {
  i128 s = static_cast<i128>(x);
  const u128 half = static_cast<u128>(1) << 127;
  u128 mag = s < 0 ? static_cast<u128>(-(s + 1)) + 1 : static_cast<u128>(s);
  if (mag <= err) return 2;
  if (mag >= half - err) return 2;
  return s < 0 ? -1 : 1;
}

}  // namespace osc
