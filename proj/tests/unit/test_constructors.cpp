#include <doctest.h>

#include "osc/cf_engine.hpp"
#include "osc/constructors.hpp"
#include "osc/error.hpp"
#include "osc/orbit.hpp"

using namespace osc;

namespace {
Exponent ex(const char* s) { return Exponent::parse(s); }

std::vector<mpq_class> qs(std::initializer_list<const char*> xs) {
  std::vector<mpq_class> v;
  for (auto x : xs) v.push_back(parse_rational(x));
  return v;
}

mpz_class prefix_K(const ConvergentTable& t, const OstrowskiDigits& d, std::size_t m) {
  mpz_class K = 0;
  for (std::size_t n = 0; n <= m; ++n) K += d.digit(n) * t.q[n];
  return K;
}

// rebuild rho from its text form and evaluate w at K_m from scratch
void check_independently(const ConvergentTable& t, const Exponent& beta, const RhoBuildCertificate& c) {
  Orbit o(t.alpha, Rho::parse(c.rho));
  for (const auto& e : c.entries) {
    CHECK(e.k == prefix_K(t, c.digits, e.m));
    CHECK(e.family == "K_m");
    CertifiedReal w = o.eval_rel(o.w_term(e.k, beta), 96);
    mpq_class res = abs(w.center() - e.target) + w.radius();
    CHECK(res <= mpq_class(1, static_cast<unsigned long>(e.j)));
    CHECK(e.ok);
  }
}

bool digits_legal_local(const ConvergentTable& t, const OstrowskiDigits& d) {
  for (std::size_t n = 1; n < d.e.size(); ++n) {
    if (d.e[n] < 0 || d.e[n] > t.a[n + 1]) return false;
    if (d.e[n] == t.a[n + 1] && d.digit(n - 1) != 0) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("build_rho: a zero target needs only the level digit") {
  auto t = build_table(make_alpha(specs::kGolden), 40);
  auto c = build_rho(t, ex("2"), qs({"0"}));
  REQUIRE(c.valid());
  CHECK(c.used == RhoCase::Case2);
  REQUIRE(c.entries.size() == 1);
  CHECK(c.entries[0].m == 2);
  CHECK(c.entries[0].residual.upper() == 0);
  for (std::size_t n = 0; n < c.digits.e.size(); ++n) CHECK(c.digits.e[n] == (n == 2 ? 1 : 0));
}

TEST_CASE("build_rho case 1: Liouville-built alpha, beta = 2, five targets") {
  auto L = build_liouville_alpha(ex("2"), 9);
  REQUIRE(L.complete);
  auto t = build_table(L.alpha, 9);
  auto c = build_rho(t, ex("2"), qs({"1", "-2", "1/2", "3", "-1/4"}));
  REQUIRE(c.valid());
  CHECK(c.used == RhoCase::Case1);
  CHECK(c.mu_plus.cls == MuClass::Zero);
  CHECK(c.mu_minus.cls == MuClass::Zero);
  REQUIRE(c.entries.size() == 5);
  for (std::size_t j = 1; j < 5; ++j) CHECK(c.entries[j].m > c.entries[j - 1].m);
  CHECK(digits_legal_local(t, c.digits));
  CHECK(c.extendable_by_zeros);
  check_independently(t, ex("2"), c);
}

TEST_CASE("build_rho case 2: golden and sqrt2") {
  SUBCASE("golden, beta = 2") {
    auto t = build_table(make_alpha(specs::kGolden), 400);
    auto c = build_rho(t, ex("2"), qs({"1", "-2", "1/2", "3", "-1/4"}));
    REQUIRE(c.valid());
    CHECK(c.used == RhoCase::Case2);
    for (const auto& e : c.entries) CHECK((e.m % 2 == 0) == (sgn(e.target) >= 0));
    CHECK(digits_legal_local(t, c.digits));
    check_independently(t, ex("2"), c);
  }
  SUBCASE("sqrt2, beta = 3/2") {
    auto t = build_table(make_alpha(specs::kSqrt2), 200);
    auto c = build_rho(t, ex("3/2"), qs({"1", "-2", "1/2", "3", "-1/4"}));
    REQUIRE(c.valid());
    check_independently(t, ex("3/2"), c);
  }
}

TEST_CASE("build_rho case 3") {
  SUBCASE("mu+ infinite, mu- zero: positive targets on even m") {
    auto A = build_asymmetric_alpha(ex("2"), 1, 24, true);
    auto t = build_table(A.alpha, A.depth_reached);
    auto c = build_rho(t, ex("2"), qs({"1", "2", "1/2", "3", "1/4"}));
    REQUIRE(c.valid());
    CHECK(c.used == RhoCase::Case3);
    CHECK(c.mu_plus.cls == MuClass::Infinite);
    CHECK(c.mu_minus.cls == MuClass::Zero);
    for (const auto& e : c.entries) {
      CHECK(e.m % 2 == 0);
      CHECK(c.digits.digit(e.m - 1) <= 1);
    }
    check_independently(t, ex("2"), c);
    CHECK_THROWS_AS(build_rho(t, ex("2"), qs({"1", "-1"})), Error);
  }
  SUBCASE("mirror: negative targets on odd m") {
    auto A = build_asymmetric_alpha(ex("2"), 1, 24);
    auto t = build_table(A.alpha, A.depth_reached);
    auto c = build_rho(t, ex("2"), qs({"-1", "-2", "-1/2"}));
    REQUIRE(c.valid());
    for (const auto& e : c.entries) CHECK(e.m % 2 == 1);
    check_independently(t, ex("2"), c);
    try {
      build_rho(t, ex("2"), qs({"1"}));
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
  }
}

TEST_CASE("build_rho errors") {
  auto golden = make_alpha(specs::kGolden);
  auto code_of = [](auto&& f) -> std::optional<ErrorCode> {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  auto t40 = build_table(golden, 40);
  CHECK(code_of([&] { build_rho(t40, ex("1"), qs({"1"})); }) == ErrorCode::HypothesisUnmet);
  CHECK(code_of([&] { build_rho(t40, ex("2"), qs({"1"}), RhoCase::Case1); }) == ErrorCode::HypothesisUnmet);
  CHECK(code_of([&] { build_rho(t40, ex("2"), {}); }) == ErrorCode::InvalidArgument);
  auto t12 = build_table(golden, 12);
  CHECK(code_of([&] { build_rho(t12, ex("2"), qs({"1", "-2", "1/2", "3", "-1/4", "5", "-5", "7"})); }) ==
        ErrorCode::DepthExhausted);
  CHECK(parse_rho_case("case2") == RhoCase::Case2);
  CHECK_THROWS_AS(parse_rho_case("case4"), Error);
}

TEST_CASE("certificate_json") {
  auto t = build_table(make_alpha("rule:asym:2,1,swap"), 16);
  auto c = build_rho(t, ex("2"), qs({"1", "1/2"}));
  auto j = certificate_json(c);
  CHECK(j.find("\"kind\": \"rho-certificate\"") != std::string::npos);
  CHECK(j.find("\"case\": \"case3\"") != std::string::npos);
  CHECK(j.find("\"extendable_by_zeros\": true") != std::string::npos);
  CHECK(j.find("\"valid\": true") != std::string::npos);
  CHECK(j == certificate_json(build_rho(t, ex("2"), qs({"1", "1/2"}))));
}

TEST_CASE("build_asymmetric_alpha") {
  auto A = build_asymmetric_alpha(ex("1"), 3, 12);
  CHECK(A.spec == "rule:asym:1,3");
  CHECK(A.complete);
  auto t = build_table(A.alpha, 12);
  CHECK(t.a[1] == 1);
  for (std::size_t n = 2; n <= 12; ++n) {
    if (n % 2 == 1)
      CHECK(t.a[n] == static_cast<unsigned long>(n));
    else
      CHECK(t.a[n] == 3);
  }
  // beta = 2: even-index products shrink, odd ones grow
  auto B = build_asymmetric_alpha(ex("2"), 1, 20);
  auto tb = build_table(B.alpha, B.depth_reached);
  auto me = convergent_mu(tb, ex("2"), Parity::Even, 1, tb.depth(), 2);
  auto mo = convergent_mu(tb, ex("2"), Parity::Odd, 1, tb.depth(), 2);
  REQUIRE(me);
  REQUIRE(mo);
  CHECK(me->value.upper() < mo->value.lower());
}

TEST_CASE("build_liouville_alpha reports the reachable depth") {
  auto L = build_liouville_alpha(ex("2"), 15);
  CHECK(L.spec == "rule:liouville:2");
  CHECK_FALSE(L.complete);
  CHECK(L.depth_reached >= 10);
  CHECK(L.depth_reached < 15);
  auto t = build_table(L.alpha, 6);
  for (std::size_t n = 2; n < 6; ++n) {
    mpz_class q3 = t.q[n] * t.q[n] * t.q[n];
    CHECK(t.a[n + 1] == q3);
  }
}
