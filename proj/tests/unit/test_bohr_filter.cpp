#include <doctest.h>

#include <random>

#include "osc/bohr_filter.hpp"
#include "osc/error.hpp"

using namespace osc;

namespace {
Exponent ex(const char* s) { return Exponent::parse(s); }

std::vector<mpz_class> exhaustive(const Orbit& o, std::uint64_t N, const BohrRadius& r) {
  std::vector<mpz_class> out;
  for (std::uint64_t k = 1; k <= N; ++k)
    if (in_window(o, mpz_class(static_cast<unsigned long>(k)), r)) out.push_back(mpz_class(static_cast<unsigned long>(k)));
  return out;
}

OstrowskiDigits zeros(std::size_t n) {
  OstrowskiDigits d;
  d.e.assign(n + 1, 0);
  return d;
}
}  // namespace

TEST_CASE("first_hit agrees with direct search") {
  for (int m = 1; m <= 40; ++m)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; c += 3) {
          std::optional<int> want;
          for (int y = 0; y < m; ++y)
            if ((a * y + b) % m <= c) {
              want = y;
              break;
            }
          auto got = detail::first_hit(a, b, m, c);
          REQUIRE(got.has_value() == want.has_value());
          if (want) REQUIRE(*got == *want);
        }
}

TEST_CASE("output-sensitive walk finds every window member") {
  for (auto spec : {specs::kGolden, specs::kSqrt2, std::string_view("rule:liouville:2")}) {
    Orbit o(make_alpha(spec), Rho::parse("1/3"));
    for (const char* eps : {"1/10", "1/1000", "3/100000"}) {
      mpq_class e = parse_rational(eps);
      std::set<mpz_class> walk;
      detail::walk_candidates(o, 1, 30000, e, [&](const mpz_class& k) { walk.insert(k); });
      for (const auto& k : exhaustive(o, 30000, BohrRadius::rational(e))) CHECK(walk.count(k));
    }
  }
}

TEST_CASE("bohr_set edge cases") {
  Orbit o(make_alpha(specs::kGolden), Rho::parse("1/3"));
  auto all = bohr_set(o, 50, BohrRadius::rational(mpq_class(1, 2)));
  CHECK(all.members.size() == 50);
  CHECK(bohr_set(o, 0, BohrRadius::rational(mpq_class(1, 4))).members.empty());
}

TEST_CASE("golden window at ||q_3 alpha|| up to q_4 matches exhaustive scan") {
  auto t = build_table(make_alpha(specs::kGolden), 6);
  Orbit o(t.alpha, Rho::rational(0));
  auto r = BohrRadius::of(t.theta_form(3));
  auto w = bohr_set(o, t.q[4], r);
  CHECK(std::find(w.members.begin(), w.members.end(), t.q[3]) != w.members.end());
  CHECK(w.members == exhaustive(o, t.q[4].get_ui(), r));
}

TEST_CASE("bohr_set is monotone in eps and N") {
  Orbit o(make_alpha(specs::kSqrt3), Rho::parse("2/7"));
  auto small = bohr_set(o, 5000, BohrRadius::rational(mpq_class(1, 500)));
  auto big = bohr_set(o, 5000, BohrRadius::rational(mpq_class(1, 50)));
  auto shorter = bohr_set(o, 2000, BohrRadius::rational(mpq_class(1, 50)));
  for (const auto& k : small.members) CHECK(std::binary_search(big.members.begin(), big.members.end(), k));
  for (const auto& k : shorter.members) CHECK(std::binary_search(big.members.begin(), big.members.end(), k));
}

TEST_CASE("radius with digit divisor, integer and fractional beta") {
  auto t = build_table(make_alpha(specs::kSqrt2), 8);
  Orbit o(t.alpha, Rho::parse("1/3"));
  for (const char* b : {"2", "3/2"}) {
    BohrRadius r{t.theta_form(2), 2, ex(b)};
    auto w = bohr_set(o, 3000, r);
    CHECK(w.members == exhaustive(o, 3000, r));
  }
}

TEST_CASE("frak_D contains every K_n") {
  auto t = build_table(make_alpha(specs::kGolden), 14);
  Orbit o(t.alpha, Rho::parse("1/3"));
  auto d = ostrowski_real(o, t, 12);
  auto D = frak_D(o, t, d, ex("1"), 10);
  auto K = kappa_seq(d, t);
  for (std::size_t n = 1; n <= 10; ++n)
    if (K[n] >= 1) CHECK(D.members.count(K[n]));
  for (const auto& [k, p] : D.provenance) CHECK((p.n >= 1 && p.n <= 10));
  CHECK(frak_json(D).find("\"provenance\"") != std::string::npos);
}

TEST_CASE("frak_D with zero digits keeps only near-integer multiples") {
  auto t = build_table(make_alpha(specs::kSqrt2), 8);
  Orbit o(t.alpha, Rho::rational(0));
  auto D = frak_D(o, t, zeros(6), ex("2"), 6);
  for (const auto& [k, p] : D.provenance) CHECK(p.prime);
  CHECK(D.members.count(t.q[3]));
  auto one = frak_D(o, t, zeros(6), ex("2"), 1);
  for (const auto& [k, p] : one.provenance) CHECK(p.n == 1);
}

TEST_CASE("covering_sets") {
  auto t = build_table(make_alpha(specs::kGolden), 10);
  auto c = covering_sets(t, zeros(8), 5);
  CHECK(c.M.empty());  // K_5 = 0: {0, -q_5, -2q_5} has no positive member
  Orbit o(t.alpha, Rho::parse("1/3"));
  auto d = ostrowski_real(o, t, 8);
  auto c6 = covering_sets(t, d, 6);
  CHECK(c6.M.size() + c6.M_prime.size() <= 7);
  auto K = kappa_seq(d, t);
  CHECK(c6.M_prime.count(K[6] + t.q[6]));
  CHECK(c6.M_prime.count(K[6] + t.q[7]));
  auto c1 = covering_sets(t, d, 1);
  CHECK(c1.M_prime.count(K[1] + t.q[2]));
}

TEST_CASE("verify_inclusions on the spec cases") {
  auto g = build_table(make_alpha(specs::kGolden), 20);
  Orbit o(g.alpha, Rho::parse("1/3"));
  auto d = ostrowski_real(o, g, 17);
  auto r = verify_inclusions(o, g, d, ex("1"), 15);
  CHECK(r.holds());
  for (auto spec : {specs::kSqrt2, specs::kGolden, specs::kSqrt3}) {
    auto t = build_table(make_alpha(spec), 14);
    CHECK(verify_inclusions(Orbit(t.alpha, Rho::rational(0)), t, zeros(12), ex("2"), 10).holds());
    auto s = zeros(12);
    s.e[2] = 1;
    CHECK(verify_inclusions(Orbit(t.alpha, digits_rho(s, t)), t, s, ex("1"), 10).holds());
  }
  auto L = build_table(make_alpha("rule:liouville:2"), 8);
  OstrowskiDigits ones = zeros(7);
  for (std::size_t n = 1; n <= 7; ++n) ones.e[n] = 1;
  CHECK(verify_inclusions(Orbit(L.alpha, digits_rho(ones, L)), L, ones, ex("2"), 6).holds());
}

TEST_CASE("stated covering misses K_n - q_n when e_n >= 2; the derived rule covers it") {
  // a = [0;3,1,4,1,5,...]: digits with e_4 = 3 put K_4 - q_4 into N(4).
  auto t = build_table(make_alpha("cf:[0;3,1,4,1,5,9,2,6,5,3,5,8,9,7,9,(3,2,3,8,4,6)]"), 16);
  OstrowskiDigits d = zeros(13);
  std::vector<int> e{0, 0, 4, 0, 3, 7, 0, 3, 4, 2, 4, 1, 3, 6};
  for (std::size_t i = 0; i < e.size(); ++i) d.e[i] = e[i];
  REQUIRE(digits_legal(d, t));
  Orbit o(t.alpha, digits_rho(d, t));
  auto stated = verify_inclusions(o, t, d, ex("1"), 12);
  CHECK_FALSE(stated.D_covered);
  CHECK(stated.kappa_in_D);
  CHECK(stated.nesting);
  CHECK(verify_inclusions(o, t, d, ex("1"), 12, CoveringRule::Derived).holds());
}

TEST_CASE("random digits: derived covering and nesting always hold") {
  std::mt19937 rng(11);
  for (auto spec : {specs::kSqrt2, std::string_view("rule:linear:1,0")}) {
    auto t = build_table(make_alpha(spec), 14);
    for (int trial = 0; trial < 10; ++trial) {
      OstrowskiDigits d = zeros(11);
      for (std::size_t n = 1; n <= 11; ++n) {
        d.e[n] = static_cast<unsigned long>(rng() % (t.a[n + 1].get_ui() + 1));
        if (d.e[n - 1] == t.a[n] && n > 1) d.e[n] = 0;
      }
      if (!digits_legal(d, t)) continue;
      Orbit o(t.alpha, digits_rho(d, t));
      auto r = verify_inclusions(o, t, d, ex("2"), 10, CoveringRule::Derived);
      CHECK(r.holds());
    }
  }
}

TEST_CASE("filter_check on bounded-type alpha holds beyond the threshold") {
  for (auto spec : {specs::kSqrt2, specs::kGolden}) {
    auto t = build_table(make_alpha(spec), 40);
    Orbit o(t.alpha, Rho::parse("1/3"));
    auto d = ostrowski_real(o, t, 38);
    auto r = filter_check(o, t, d, ex("2"), 200000, 10);
    CHECK(r.hypothesis_ok);
    REQUIRE(r.threshold);
    CHECK(r.violations.empty());
    CHECK(r.holds());
  }
}

TEST_CASE("filter_check below the threshold is vacuous") {
  auto t = build_table(make_alpha(specs::kGolden), 40);
  Orbit o(t.alpha, Rho::parse("1/3"));
  auto d = ostrowski_real(o, t, 38);
  auto r = filter_check(o, t, d, ex("2"), 50, 10);
  CHECK(r.vacuous);
  CHECK(r.holds());
}

TEST_CASE("filter_check zero digits: complement minima grow") {
  auto t = build_table(make_alpha(specs::kGolden), 40);
  Orbit o(t.alpha, Rho::rational(0));
  auto r = filter_check(o, t, zeros(38), ex("2"), 1000000, 10);
  REQUIRE(r.trace.size() >= 6);
  const auto& last = r.trace.back();
  REQUIRE(last.block_min);
  CHECK(last.exhaustive);
  CHECK(last.block_min->lower() > 1000000);
  CHECK(r.holds());
  CHECK(filter_json(r).find("complement_min_trace") != std::string::npos);
}

TEST_CASE("filter_check on a Liouville alpha finds complement hits and reports the hypothesis unmet") {
  auto t = build_table(make_alpha("rule:liouville:2"), 7);
  Orbit o(t.alpha, Rho::parse("1/3"));
  auto d = ostrowski_real(o, t, 6);
  auto r = filter_check(o, t, d, ex("2"), kappa_seq(d, t)[5], 10, 200);
  CHECK_FALSE(r.hypothesis_ok);
  CHECK(r.hit_count > 0);
  CHECK_FALSE(r.holds());
}
