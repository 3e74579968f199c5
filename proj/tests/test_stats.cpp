#include <doctest.h>

#include <cmath>
#include <vector>

#include "cplab/stats.hpp"

using namespace cplab;

namespace {
bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }
}  // namespace

TEST_SUITE("stats") {

TEST_CASE("wilson intervals match independently computed references") {
  // (hits, n, z) -> (value, lo, hi), cross-checked with a separate tool.
  Estimate e = wilson_estimate(0, 10, kZ95);
  CHECK(close(e.value, 0.0));
  CHECK(close(e.lo, 0.0));
  CHECK(close(e.hi, 0.2775327998628892));

  e = wilson_estimate(10, 10, kZ95);
  CHECK(close(e.value, 1.0));
  CHECK(close(e.lo, 0.7224672001371107));
  CHECK(close(e.hi, 1.0, 1e-12));

  e = wilson_estimate(7, 50, kZ95);
  CHECK(close(e.value, 0.14));
  CHECK(close(e.lo, 0.06950833427016294));
  CHECK(close(e.hi, 0.2618619371058554));

  e = wilson_estimate(400, 1000, kZ99);
  CHECK(close(e.lo, 0.36088080567445163));
  CHECK(close(e.hi, 0.44043742730622976));

  e = wilson_estimate(1, 1000000, kZ90);
  CHECK(close(e.lo, 2.230922523521047e-07, 1e-18));
  CHECK(close(e.hi, 4.482438470725462e-06, 1e-16));
}

TEST_CASE("wilson interval always contains the point estimate") {
  for (std::uint64_t n : {1ull, 7ull, 100ull}) {
    for (std::uint64_t h = 0; h <= n; ++h) {
      const Estimate e = wilson_estimate(h, n, kZ95);
      CHECK(e.lo <= e.value + 1e-15);
      CHECK(e.value <= e.hi + 1e-15);
      CHECK(e.lo >= 0.0);
      CHECK(e.hi <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("two-sided binomial p-values match independent references") {
  CHECK(close(binomial_two_sided_p(5, 10, 0.5), 1.0));
  CHECK(close(binomial_two_sided_p(0, 10, 0.5), 0.001953125));
  CHECK(close(binomial_two_sided_p(3, 100, 0.1), 0.017843766383309492, 1e-10));
  CHECK(close(binomial_two_sided_p(60, 100, 0.5), 0.056887933640980784, 1e-10));
  CHECK(close(binomial_two_sided_p(17, 20, 0.75), 0.4393741000631053, 1e-10));
  CHECK(close(binomial_two_sided_p(2, 1000, 0.001), 0.2642410869698125, 1e-10));
}

TEST_CASE("binomial p-value edge cases") {
  CHECK(binomial_two_sided_p(0, 100, 0.0) == 1.0);
  CHECK(binomial_two_sided_p(1, 100, 0.0) == 0.0);
  CHECK(binomial_two_sided_p(100, 100, 1.0) == 1.0);
  CHECK(binomial_two_sided_p(99, 100, 1.0) == 0.0);
}

TEST_CASE("normal tail matches erfc references") {
  CHECK(close(normal_two_sided_tail(0.0), 1.0));
  CHECK(close(normal_two_sided_tail(1.0), 0.31731050786291415));
  CHECK(close(normal_two_sided_tail(kZ95), 0.05, 1e-10));
  CHECK(close(normal_two_sided_tail(4.0), 6.334248366623993e-05, 1e-15));
  CHECK(normal_two_sided_tail(-2.0) == normal_two_sided_tail(2.0));
}

TEST_CASE("mean estimate covers a constant sample exactly") {
  std::vector<double> xs(50, 0.25);
  const Estimate e = mean_estimate(xs, kZ95);
  CHECK(close(e.value, 0.25));
  CHECK(close(e.lo, 0.25));
  CHECK(close(e.hi, 0.25));
}

TEST_CASE("estimates_compatible is symmetric and tolerant of identical inputs") {
  const Estimate a = wilson_estimate(40, 100, kZ95);
  const Estimate b = wilson_estimate(44, 100, kZ95);
  const Estimate c = wilson_estimate(90, 100, kZ95);
  CHECK(estimates_compatible(a, a, kZ95));
  CHECK(estimates_compatible(a, b, kZ95) == estimates_compatible(b, a, kZ95));
  CHECK(!estimates_compatible(a, c, kZ95));
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> xs{1, 2, 3, 4, 5}, ys;
  for (double x : xs) ys.push_back(3.5 - 2.0 * x);
  const LineFit f = least_squares(xs, ys);
  REQUIRE(f.ok);
  CHECK(close(f.slope, -2.0));
  CHECK(close(f.intercept, 3.5));
  CHECK(close(f.r2, 1.0));
  CHECK(f.points == 5);
}

TEST_CASE("least squares needs three points and x spread") {
  const std::vector<double> two{1, 2};
  CHECK(!least_squares(two, two).ok);
  const std::vector<double> flat{2, 2, 2}, rise{1, 2, 3};
  CHECK(!least_squares(flat, rise).ok);
}

TEST_CASE("log-linear fit recovers an exact exponential and skips zeros") {
  std::vector<double> xs{0, 1, 2, 3, 4}, ys;
  for (double x : xs) ys.push_back(0.8 * std::exp(-0.6 * x));
  LineFit f = log_linear_fit(xs, ys);
  REQUIRE(f.ok);
  CHECK(close(f.slope, -0.6, 1e-10));
  CHECK(close(std::exp(f.intercept), 0.8, 1e-10));

  ys[2] = 0.0;  // dropped, fit still exact on the rest
  f = log_linear_fit(xs, ys);
  REQUIRE(f.ok);
  CHECK(f.points == 4);
  CHECK(close(f.slope, -0.6, 1e-10));
}

}  // TEST_SUITE
