#include <doctest.h>

#include <cmath>
#include <vector>

#include "cplab/rng.hpp"

using namespace cplab;

TEST_SUITE("rng") {

TEST_CASE("streams are deterministic and key-separated") {
  RngStream a({1, 2}), b({1, 2}), c({1, 3}), d({2, 2});
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
  }
}

TEST_CASE("child keys chain and replica keys are stable under extension") {
  const RngKey base{42, 7};
  CHECK(base.child({1}) == base.child({1}));
  CHECK(base.child({1}) != base.child({2}));
  CHECK(base.child({1, 2}) != base.child({2, 1}));

  // Growing the replica count never changes earlier replicas' keys.
  std::vector<RngKey> first;
  for (std::uint64_t r = 0; r < 8; ++r) first.push_back(replica_key(9, r));
  for (std::uint64_t r = 0; r < 8; ++r) CHECK(replica_key(9, r) == first[r]);
  CHECK(replica_key(9, 0) != replica_key(10, 0));
}

TEST_CASE("next_unit lies in [0,1) and has the right mean") {
  RngStream s({5, derive_stream({99})});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Mean 1/2, sd of the mean = 1/sqrt(12 n); allow 5 sigma.
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("next_exponential has the right mean and is strictly positive") {
  RngStream s({6, derive_stream({100})});
  double sum = 0.0;
  const int n = 200000;
  const double rate = 3.0;
  for (int i = 0; i < n; ++i) {
    const double g = s.next_exponential(rate);
    REQUIRE(g > 0.0);
    sum += g;
  }
  // Mean 1/rate, sd of the sample mean = 1/(rate sqrt(n)); allow 5 sigma.
  CHECK(std::abs(sum / n - 1.0 / rate) < 5.0 / (rate * std::sqrt(double(n))));
}

TEST_CASE("append_poisson_times stays inside (t0, t1] sorted strictly") {
  RngStream s({7, derive_stream({101})});
  std::vector<double> out;
  append_poisson_times(out, 4.0, -2.0, 3.0, s);
  REQUIRE(!out.empty());
  double prev = -2.0;
  for (double t : out) {
    CHECK(t > prev);
    CHECK(t > -2.0);
    CHECK(t <= 3.0);
    prev = t;
  }
}

TEST_CASE("poisson count matches the zero-event probability") {
  // P(no event in a window of mass 3) = e^-3 = 0.049787068367863944.
  RngStream s({8, derive_stream({102})});
  int zero = 0;
  const int n = 100000;
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    out.clear();
    append_poisson_times(out, 1.5, 0.0, 2.0, s);
    if (out.empty()) ++zero;
  }
  const double p = 0.049787068367863944;
  const double sd = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(double(zero) / n - p) < 5.0 * sd);
}

TEST_CASE("rate zero or empty windows yield no events") {
  RngStream s({9, derive_stream({103})});
  std::vector<double> out;
  append_poisson_times(out, 0.0, 0.0, 5.0, s);
  CHECK(out.empty());
  append_poisson_times(out, 2.0, 1.0, 1.0, s);
  CHECK(out.empty());
}

}  // TEST_SUITE
