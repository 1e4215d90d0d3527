#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hmai/criteria.hpp"
#include "hmai/envgen.hpp"
#include "oracles.hpp"

using namespace hmai;

namespace {
RssParams at_velocity(double v) {
  RssParams p;
  p.v1 = v;
  p.v2 = v;
  return p;
}
}  // namespace

TEST_CASE("rss distance at zero response time is the two braking terms") {
  const double v = kmh_to_ms(60.0);
  const double d = rss_min_distance(0.0, at_velocity(v));
  CHECK(d == doctest::Approx(2.0 * v * v / 12.4).epsilon(1e-12));
  CHECK(d == doctest::Approx(44.80).epsilon(0.005));
  CHECK(rss_min_distance(0.0, at_velocity(0.0)) == 0.0);
}

TEST_CASE("rss distance matches the written-out formula") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rho(0.0, 5.0), v(0.0, 40.0);
  for (int i = 0; i < 200; ++i) {
    RssParams p;
    p.v1 = v(rng);
    p.v2 = -v(rng);
    const double r = rho(rng);
    const double want = oracle::rss_distance(r, p.v1, p.v2, p.a_max_accel,
                                             p.a_min_brake_correct,
                                             p.a_min_brake);
    CHECK(rss_min_distance(r, p) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("rss distance is strictly increasing in rho") {
  for (double v : {kmh_to_ms(60.0), kmh_to_ms(80.0), kmh_to_ms(120.0), 0.5}) {
    const auto p = at_velocity(v);
    double prev = rss_min_distance(0.0, p);
    for (int i = 1; i <= 1000; ++i) {
      const double d = rss_min_distance(i * 0.005, p);
      REQUIRE(d > prev);
      prev = d;
    }
  }
  CHECK(rss_min_distance(0.5, at_velocity(kmh_to_ms(60.0))) >
        rss_min_distance(0.0, at_velocity(kmh_to_ms(60.0))));
}

TEST_CASE("rss rejects negative rho") {
  CHECK_THROWS_AS(rss_min_distance(-0.1, at_velocity(10.0)), DomainError);
}

TEST_CASE("safety time inverts the distance within 1e-9 s") {
  for (double kmh : {60.0, 80.0, 120.0}) {
    const auto p = at_velocity(kmh_to_ms(kmh));
    for (int i = 1; i <= 50; ++i) {
      const double rho = 5.0 * i / 50.0;
      CHECK(std::abs(safety_time(rss_min_distance(rho, p), p) - rho) <= 1e-9);
    }
  }
  const auto ub = at_velocity(kmh_to_ms(60.0));
  CHECK(std::abs(safety_time(rss_min_distance(0.25, ub), ub) - 0.25) <= 1e-9);
}

TEST_CASE("safety time ordering in velocity and distance") {
  CHECK(safety_time(250.0, at_velocity(kmh_to_ms(60.0))) >
        safety_time(250.0, at_velocity(kmh_to_ms(120.0))));
  double prev = 1e9;
  for (double v = 5.0; v <= 30.0; v += 1.0) {
    const double st = safety_time(250.0, at_velocity(v));
    CHECK(st < prev);
    prev = st;
  }
  const auto ub = at_velocity(kmh_to_ms(60.0));
  prev = 0.0;
  for (double d = 50.0; d <= 400.0; d += 10.0) {
    const double st = safety_time(d, ub);
    CHECK(st > prev);
    prev = st;
  }
}

TEST_CASE("safety time errors below the zero-response floor") {
  const auto ub = at_velocity(kmh_to_ms(60.0));
  CHECK_THROWS_WITH_AS(safety_time(10.0, ub), doctest::Contains("insufficient"),
                       DomainError);
}

TEST_CASE("DET matching score is linear up to st and -1 after") {
  CHECK(matching_score_det(2.0, 2.0) == 1.0);
  CHECK(matching_score_det(0.0, 2.0) == 0.0);
  CHECK(matching_score_det(2.0 + 1e-9, 2.0) == -1.0);
  for (int i = 0; i <= 100; ++i) {
    const double st = 0.4;
    const double r = st * i / 100.0;
    CHECK(std::abs(matching_score_det(r, st) - r / st) <= 1e-12);
    const double s = matching_score_det(r * 3.0, st);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    CHECK((s == -1.0) == (r * 3.0 > st));
  }
}

TEST_CASE("TRA matching score is +1 inside the deadline") {
  CHECK(matching_score_tra(0.5, 1.0) == 1.0);
  CHECK(matching_score_tra(1.0, 1.0) == 1.0);
  CHECK(matching_score_tra(2.0, 1.0) == -1.0);
}

TEST_CASE("gvalue") {
  const NormalizationScales n{2.0, 4.0};
  CHECK(gvalue({2.0, 4.0, 1.0, 0.0}, n) == doctest::Approx(-1.0 / 3.0));
  CHECK(gvalue({}, n) == 0.0);
  CHECK(gvalue({1.0, 1.0, 0.6, 0.0}, n) > gvalue({1.0, 1.0, 0.5, 0.0}, n));
  CHECK_THROWS_AS(gvalue({}, NormalizationScales{0.0, 1.0}), DomainError);
}

TEST_CASE("HW-Info updates in both R_Balance modes") {
  HwInfo h;
  h = update_hw_info(h, 1.0, 0.1, 0.5, 0.6, RBalanceMode::Recursive);
  CHECK(h.r_balance == doctest::Approx(0.6));
  h = update_hw_info(h, 1.0, 0.1, 0.5, 1.0, RBalanceMode::Recursive);
  CHECK(h.r_balance == doctest::Approx(0.8));
  const HwInfo lit = update_hw_info(h, 1.0, 0.1, 0.5, 0.2, RBalanceMode::Recursive);
  CHECK(lit.r_balance == doctest::Approx((0.2 + 0.8) / 3.0));

  HwInfo m;
  for (double r : {0.6, 1.0, 0.2}) {
    m = update_hw_info(m, 1.0, 0.1, 0.5, r, RBalanceMode::ArithmeticMean);
  }
  CHECK(m.r_balance == doctest::Approx((0.6 + 1.0 + 0.2) / 3.0));
  CHECK(m.energy == doctest::Approx(3.0));
  CHECK(m.time == doctest::Approx(0.3));
  CHECK(m.ms == doctest::Approx(1.5));
  CHECK(m.num_executed == 3);
}

TEST_CASE("reward") {
  const NormalizationScales n{1.0, 1.0};
  const PlatformSummary a{1.0, 2.0, 0.5, 3.0};
  CHECK(reward(a, a, n) == 0.0);
  PlatformSummary b = a;
  b.ms += 1.0;
  CHECK(reward(a, b, n) == doctest::Approx(1.0));
}

TEST_CASE("reward telescopes over a sequence of summaries") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const NormalizationScales n{3.0, 7.0};
  PlatformSummary s0{}, s = s0;
  double total = 0.0;
  for (int i = 0; i < 100; ++i) {
    PlatformSummary next = s;
    next.energy += u(rng);
    next.time += u(rng);
    next.r_balance = u(rng);
    next.ms += 2.0 * u(rng) - 1.0;
    total += reward(s, next, n);
    s = next;
  }
  CHECK(total == doctest::Approx(gvalue(s, n) - gvalue(s0, n) + s.ms - s0.ms)
                     .epsilon(1e-12));
}
