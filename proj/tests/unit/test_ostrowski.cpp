#include <doctest.h>

#include <functional>
#include <map>

#include "osc/error.hpp"
#include "osc/ostrowski.hpp"

using namespace osc;

namespace {

std::vector<long> as_long(const std::vector<mpz_class>& v) {
  std::vector<long> out;
  for (const auto& x : v) out.push_back(x.get_si());
  return out;
}

mpz_class digit_sum(const OstrowskiDigits& d, const ConvergentTable& t) {
  mpz_class s = 0;
  for (std::size_t j = 0; j < d.e.size(); ++j) s += d.e[j] * t.q[j];
  return s;
}

constexpr std::string_view kPiLike = "dec:3.14159265358979323846264338327950288419716939937510@50";

}  // namespace

TEST_CASE("ostrowski_int examples") {
  auto g = build_table(make_alpha(specs::kGolden), 8);
  auto d = ostrowski_int(4, g);
  // e_0 is pinned to 0 when a_1 = 1, so the unit lands on q_1 = 1.
  CHECK(as_long(d.e) == std::vector<long>{0, 1, 0, 1, 0, 0, 0, 0, 0});
  CHECK(digit_sum(d, g) == 4);
  auto d5 = ostrowski_int(g.q[5], g);
  for (std::size_t j = 0; j < d5.e.size(); ++j) CHECK(d5.e[j] == (j == 5 ? 1 : 0));
  auto s2 = build_table(make_alpha(specs::kSqrt2), 5);
  CHECK(as_long(ostrowski_int(70, s2).e) == std::vector<long>{0, 0, 0, 0, 0, 1});
  CHECK_THROWS_AS(ostrowski_int(169, s2), Error);
}

TEST_CASE("ostrowski_int roundtrip k <= 1e5") {
  for (auto spec : {specs::kGolden, specs::kSqrt2, specs::kSqrt3}) {
    auto a = make_alpha(spec);
    std::size_t N = 0;
    while (a->q(N + 1) <= 100000) ++N;
    auto t = build_table(a, N);
    bool ok = true;
    for (long k = 0; k <= 100000 && ok; ++k) {
      auto d = ostrowski_int(k, t);
      ok = digit_sum(d, t) == k && digits_legal(d, t, true);
      if (!ok) FAIL_CHECK("k=" << k << " " << digit_violation(d, t, true));
    }
    CHECK(ok);
  }
}

TEST_CASE("ostrowski_int uniqueness by exhaustive enumeration on golden") {
  const long K = 10000;
  auto a = make_alpha(specs::kGolden);
  std::size_t N = 0;
  while (a->q(N + 1) <= K) ++N;
  auto t = build_table(a, N + 1);
  std::map<long, int> seen;
  std::vector<long> e(N + 1, 0);
  // Enumerate every legal digit list e_0..e_N with sum <= K, top index first.
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
      e[n] = v;
      rec(n - 1, s, v);
    }
    e[n] = 0;
  };
  rec(static_cast<long>(N), 0, 0);
  CHECK(seen.size() == static_cast<std::size_t>(K + 1));
  bool unique = true;
  for (auto& [k, c] : seen) unique = unique && c == 1;
  CHECK(unique);
}

TEST_CASE("index-0 coupling matters for integer uniqueness when a_1 >= 2") {
  auto t = build_table(make_alpha(specs::kSqrt2), 4);
  // 5 = 1*q_0 + 2*q_1 = q_2; the first list passes only the n >= 1 rule.
  OstrowskiDigits d{0, {1, 2, 0, 0, 0}, t.alpha->str()};
  CHECK(digits_legal(d, t, false));
  CHECK_FALSE(digits_legal(d, t, true));
  CHECK(as_long(ostrowski_int(5, t).e) == std::vector<long>{0, 0, 1, 0, 0});
}

TEST_CASE("ostrowski_real examples") {
  auto g = build_table(make_alpha(specs::kGolden), 30);
  {
    Orbit o(g.alpha, Rho::linear(-1, 1));  // {alpha}
    auto d = ostrowski_real(o, g, 25);
    CHECK(d.e[0] == 0);
    // {alpha} = 1 + <q_1 alpha>_2 for golden, so rho0 = 1 under [-{alpha}, 1-{alpha}).
    CHECK(d.rho0 == 1);
    CHECK(d.e[1] == 1);
    for (std::size_t n = 0; n <= 25; ++n) CHECK(residue_bound_check(o, d, g, n));
  }
  {
    Orbit o(g.alpha, Rho::rational(0));
    auto d = ostrowski_real(o, g, 25);
    CHECK(d.rho0 == 0);
    for (const auto& v : d.e) CHECK(v == 0);
  }
  auto s2 = build_table(make_alpha(specs::kSqrt2), 30);
  {
    Orbit o(s2.alpha, Rho::linear(-7, 5));  // <q_2 alpha>_2 = 5 sqrt2 - 7
    auto d = ostrowski_real(o, s2, 20);
    CHECK(d.rho0 == 0);
    for (std::size_t n = 0; n <= 20; ++n) CHECK(d.e[n] == (n == 2 ? 1 : 0));
  }
}

TEST_CASE("real digits: residue bound, legality, and reconstruction") {
  for (auto aspec : {specs::kSqrt2, specs::kGolden, specs::kSqrt3, std::string_view("rule:e:")}) {
    auto t = build_table(make_alpha(aspec), 26);
    for (auto rspec : {std::string_view("1/3"), kPiLike, std::string_view("-5/7"), std::string_view("surd:0,1,7,3")}) {
      Orbit o(t.alpha, Rho::parse(rspec));
      auto d = ostrowski_real(o, t, 20);
      CHECK_MESSAGE(digits_legal(d, t), aspec << " " << rspec << " " << digit_violation(d, t));
      for (std::size_t n = 0; n <= 20; ++n) CHECK_MESSAGE(residue_bound_check(o, d, t, n), aspec << " " << rspec << " n=" << n);
    }
  }
}

TEST_CASE("reconstruct examples") {
  auto t = build_table(make_alpha(specs::kSqrt2), 25);
  OstrowskiDigits zero{3, std::vector<mpz_class>(10, 0), t.alpha->str()};
  CHECK(reconstruct(zero, t, 9).center() == 3);
  OstrowskiDigits single{0, std::vector<mpz_class>(10, 0), t.alpha->str()};
  single.e[4] = 1;
  CHECK(overlaps(reconstruct(single, t, 9), t.err_at(4).value));
  Orbit o(t.alpha, Rho::rational(mpq_class(1, 3)));
  auto d = ostrowski_real(o, t, 20);
  CertifiedReal diff = CertifiedReal(mpq_class(1, 3)) - reconstruct(d, t, 20);
  CHECK(diff.abs().upper() <= t.err_at(20).value.abs().upper());
}

TEST_CASE("maximal alternating digits stay legal and bounded") {
  auto t = build_table(make_alpha(specs::kSqrt3), 24);
  OstrowskiDigits d{0, std::vector<mpz_class>(21, 0), t.alpha->str()};
  for (std::size_t n = 2; n <= 20; n += 2) d.e[n] = t.a[n + 1];
  REQUIRE(digits_legal(d, t));
  Orbit o(t.alpha, digits_rho(d, t));
  for (std::size_t n = 0; n <= 20; ++n) CHECK(residue_bound_check(o, d, t, n));
  auto back = ostrowski_real(o, t, 20);
  CHECK(back.rho0 == d.rho0);
  CHECK(back.e == d.e);
}

TEST_CASE("extraction inverts reconstruction on legal finite digit lists") {
  auto t = build_table(make_alpha(specs::kSqrt3), 20);
  unsigned seed = 12345;
  auto next = [&]() { return seed = seed * 1103515245u + 12345u, (seed >> 16) & 0x7fff; };
  for (int trial = 0; trial < 50; ++trial) {
    OstrowskiDigits d{static_cast<long>(next() % 5) - 2, std::vector<mpz_class>(16, 0), t.alpha->str()};
    for (std::size_t n = 0; n < 14; ++n) {
      long hi = n == 0 ? t.a[1].get_si() - 1 : t.a[n + 1].get_si();
      d.e[n] = static_cast<long>(next() % (hi + 1));
    }
    normalize_carries(d, t);
    if (!digits_legal(d, t)) continue;
    Orbit o(t.alpha, digits_rho(d, t));
    auto back = ostrowski_real(o, t, 15);
    CHECK(back.rho0 == d.rho0);
    CHECK(back.e == d.e);
  }
}

TEST_CASE("boundary case is reported for degenerate rho") {
  auto t = build_table(make_alpha(specs::kSqrt2), 20);
  // rho = -{alpha} sits on the left end of [-{alpha}, 1-{alpha}) and its tail is an infinite maximal run.
  Orbit o(t.alpha, Rho::linear(1, -1));
  try {
    ostrowski_real(o, t, 15);
    FAIL("expected boundary case");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoundaryCase);
  }
}

TEST_CASE("kappa_seq examples") {
  auto t = build_table(make_alpha(specs::kSqrt2), 8);
  OstrowskiDigits d{0, {0, 1, 0, 1}, t.alpha->str()};
  CHECK(as_long(kappa_seq(d, t)) == std::vector<long>{0, 2, 2, 14});
  OstrowskiDigits z{0, std::vector<mpz_class>(6, 0), t.alpha->str()};
  for (auto& k : kappa_seq(z, t)) CHECK(k == 0);
  z.e[5] = 1;
  auto k5 = kappa_seq(z, t);
  for (std::size_t n = 0; n < 6; ++n) CHECK(k5[n] == (n < 5 ? 0 : t.q[5].get_si()));
}

TEST_CASE("kappa bounds") {
  auto t = build_table(make_alpha(specs::kGolden), 30);
  Orbit o(t.alpha, Rho::rational(mpq_class(1, 3)));
  auto d = ostrowski_real(o, t, 25);
  auto k = kappa_seq(d, t);
  for (std::size_t n = 1; n < k.size(); ++n) {
    CHECK(k[n] >= k[n - 1]);
    CHECK(k[n] < t.q[n + 1] + k[n - 1]);
  }
}

TEST_CASE("digit json roundtrip") {
  OstrowskiDigits d{-2, {0, 1, 2, 0, 7}, "surd:0,1,2,1"};
  std::string js = digits_to_json(d);
  CHECK(js == R"({"rho0":-2,"digits":[0,1,2,0,7],"alpha":"surd:0,1,2,1"})");
  auto back = digits_from_json(js);
  CHECK(back.rho0 == -2);
  CHECK(back.e == d.e);
  CHECK(back.alpha == d.alpha);
  CHECK_THROWS(digits_from_json("{}"));
}
