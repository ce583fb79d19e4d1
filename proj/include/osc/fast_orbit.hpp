#pragma once

#include <gmpxx.h>

#include <cstdint>

#include "osc/orbit.hpp"

namespace osc {

// 128-bit fixed-point stepping of k*alpha - rho mod 1. x_k = k*A - R wraps
// modulo 2^128; read as a signed integer it approximates <k alpha - rho>_2
// with absolute error at most (k*errA + errR) * 2^-128.
class FastOrbit {
 public:
  using u128 = unsigned __int128;
  using i128 = __int128;

  explicit FastOrbit(const Orbit& orbit);

  const Orbit& orbit() const { return *orbit_; }
  u128 raw(std::uint64_t k) const { return static_cast<u128>(k) * A_ - R_; }
  u128 step() const { return A_; }
  // Error bound in units of 2^-128 at index k.
  u128 error_units(std::uint64_t k) const { return static_cast<u128>(k) * errA_ + errR_; }

  // Sign of <k alpha - rho>_2 read from x when the error cannot flip it or
  // wrap it across +-1/2; 2 when the fixed-point value is inconclusive.
  static int certain_sign(u128 x, u128 err);
  static double to_double(u128 x) { return static_cast<double>(static_cast<i128>(x)) * 0x1p-128; }
  // {k alpha - rho} in [0, 1).
  static double unsigned_double(u128 x) { return static_cast<double>(x) * 0x1p-128; }

  // Largest k for which error_units stays below 2^100.
  std::uint64_t safe_limit() const { return safe_limit_; }

 private:
  const Orbit* orbit_;
  u128 A_ = 0, R_ = 0, errA_ = 0, errR_ = 0;
  std::uint64_t safe_limit_ = 0;
};

}  // namespace osc
