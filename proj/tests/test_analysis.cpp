#include <doctest.h>

#include <cmath>

#include "cplab/analysis.hpp"
#include "cplab/processes.hpp"

using namespace cplab;

TEST_SUITE("analysis") {

TEST_CASE("all-zero curve counts leading zeros exactly") {
  std::vector<BitRow> rows = {
      {0, 0, 1, 0},  // leading zeros: 2
      {0, 0, 0, 0},  // 4
      {1, 0, 0, 0},  // 0
  };
  const AllZeroCurve c = allzero_curve(rows, 4, kZ95);
  REQUIRE(c.q.size() == 4);
  CHECK(c.q[0].hits == 2);
  CHECK(c.q[1].hits == 2);
  CHECK(c.q[2].hits == 1);
  CHECK(c.q[3].hits == 1);
  for (const Estimate& e : c.q) CHECK(e.n == 3);
  // The point floor comes from the binding index n = 2: 1 - (2/3)^(1/2).
  CHECK(c.rho_floor_point ==
        doctest::Approx(1.0 - std::sqrt(2.0 / 3.0)).epsilon(1e-13));
  CHECK(c.rho_floor < c.rho_floor_point);
  CHECK(c.replicas == 3);
}

TEST_CASE("all-zero counts are never increasing, whatever the rows") {
  RngStream s({314, 15});
  std::vector<BitRow> rows;
  for (int r = 0; r < 300; ++r) {
    BitRow row(12);
    for (auto& b : row) b = s.next_bernoulli(0.35) ? 1 : 0;
    rows.push_back(row);
  }
  const AllZeroCurve c = allzero_curve(rows, 12, kZ95);
  for (std::size_t i = 1; i < c.q.size(); ++i) CHECK(c.q[i].hits <= c.q[i - 1].hits);
  CHECK(c.rho_floor <= c.rho_floor_point);
  CHECK(c.rho_floor_point <= 1.0);
}

TEST_CASE("conditional occupancy conditions on zero columns") {
  std::vector<BitRow> rows;
  // 6 rows satisfy the condition (cols 0,1 zero); among them 4 have col 2 set.
  for (int i = 0; i < 4; ++i) rows.push_back({0, 0, 1});
  for (int i = 0; i < 2; ++i) rows.push_back({0, 0, 0});
  for (int i = 0; i < 5; ++i) rows.push_back({1, 0, 1});
  for (int i = 0; i < 3; ++i) rows.push_back({0, 1, 0});
  const std::vector<std::uint32_t> given{0, 1};
  const ConditionalCheck c = conditional_criterion(rows, 2, given, 0.3, kZ95, 3);
  CHECK(c.condition_hits == 6);
  CHECK(!c.starved);
  CHECK(c.conditional.hits == 4);
  CHECK(c.conditional.n == 6);
  CHECK(c.conditional.value == doctest::Approx(4.0 / 6.0));
  CHECK(c.pass);  // upper end well above the 0.3 floor

  const ConditionalCheck starved = conditional_criterion(rows, 2, given, 0.3, kZ95, 100);
  CHECK(starved.starved);
  CHECK(!starved.pass);

  // A floor above the interval's upper end fails.
  const ConditionalCheck high = conditional_criterion(rows, 2, given, 0.999, kZ95, 3);
  CHECK(!high.pass);
}

TEST_CASE("zero-run surface cells count conditioned runs exactly") {
  SitePath always_zero{-5.0, 10.0, 0, {}};
  SitePath one_until_minus1{-5.0, 10.0, 1, {-1.0}};
  SitePath zero_until_2{-5.0, 10.0, 0, {2.0}};
  std::vector<SitePath> paths{always_zero, one_until_minus1, zero_until_2};

  const ZeroRunSurface s =
      zero_run_surface(paths, {1.0, 3.0}, {0.0, 1.0, 2.0}, kZ95);
  REQUIRE(s.f.size() == 3);
  REQUIRE(s.f[0].size() == 2);
  // u = 0: unconditional over all three paths.
  CHECK(s.f[0][0].hits == 3);
  CHECK(s.f[0][0].n == 3);
  CHECK(s.f[0][1].hits == 2);
  // u = 1: all three paths satisfy the condition.
  CHECK(s.f[1][0].n == 3);
  CHECK(s.f[1][1].hits == 2);
  // u = 2: the path occupied until -1 drops out.
  CHECK(s.f[2][0].n == 2);
  CHECK(s.f[2][0].hits == 2);
  CHECK(s.f[2][1].hits == 1);
  CHECK(s.min_condition_hits == 2);
}

TEST_CASE("an all-zero ensemble is trivially monotone in both directions") {
  std::vector<SitePath> paths(20, SitePath{-4.0, 8.0, 0, {}});
  const ZeroRunSurface s = zero_run_surface(paths, {0.5, 1.0, 2.0}, {0.0, 1.0, 3.0}, kZ95);
  CHECK(s.monotone_in_u);
  CHECK(s.monotone_in_t);
  for (const auto& row : s.f) {
    for (const Estimate& e : row) {
      CHECK(e.value == 1.0);
      CHECK(e.n == 20);
    }
  }
}

TEST_CASE("extinction tail recovers a planted exponential rate") {
  RngStream s({2718, 28});
  std::vector<ExtinctionSample> samples;
  const double rate = 0.8, horizon = 12.0;
  for (int i = 0; i < 20000; ++i) {
    ExtinctionSample e;
    const double tau = s.next_exponential(rate);
    if (tau >= horizon) {
      e.tau = horizon;
      e.censored = true;
    } else {
      e.tau = tau;
      e.censored = false;
    }
    e.horizon = horizon;
    samples.push_back(e);
  }
  const ExtinctionTail t = extinction_tail(samples, 1.0, 10, kZ95);
  CHECK(t.finite + t.censored == 20000);
  REQUIRE(t.fit.ok);
  CHECK(t.fit.r2 > 0.95);
  CHECK(t.rate > 0.6);
  CHECK(t.rate < 1.0);
  CHECK(t.rate_lo > 0.0);
  CHECK(t.pass);
  // Survival here is the censored fraction, about e^{-0.8*12} ~ 7e-5.
  CHECK(t.survival.value < 0.01);
}

TEST_CASE("renewal records on a transmission-free history follow the grid arithmetic") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{1});
  const std::vector<VertexId> probes{0, 0, 0, 0};

  SUBCASE("single recovery at 2.5") {
    std::vector<Event> ev{{2.5, 0, kNoVertex}};
    const EventTimeline tl = EventTimeline::from_events(g, 0.0, {0.0, 4.0}, {1, 1}, ev);
    const RenewalRecord r = renewal_record(tl, probes, 1.0);
    CHECK(r.d == std::vector<std::int32_t>{0, 0, 1, 2});
    CHECK(r.censored == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(r.all_zero_n == std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(r.record_ge_n == std::vector<std::uint8_t>{0, 0, 0, 0});
  }
  SUBCASE("single recovery at 0.5 decides every probe") {
    std::vector<Event> ev{{0.5, 0, kNoVertex}};
    const EventTimeline tl = EventTimeline::from_events(g, 0.0, {0.0, 4.0}, {1, 2}, ev);
    const RenewalRecord r = renewal_record(tl, probes, 1.0);
    CHECK(r.d == std::vector<std::int32_t>{1, 2, 3, 4});
    CHECK(r.censored == std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(r.all_zero_n == std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(r.record_ge_n == std::vector<std::uint8_t>{1, 1, 1, 1});
  }
  SUBCASE("two recoveries give a two-step record walk") {
    std::vector<Event> ev{{0.7, 0, kNoVertex}, {2.2, 0, kNoVertex}};
    const EventTimeline tl = EventTimeline::from_events(g, 0.0, {0.0, 4.0}, {1, 3}, ev);
    const RenewalRecord r = renewal_record(tl, probes, 1.0);
    CHECK(r.d == std::vector<std::int32_t>{1, 2, 1, 2});
    CHECK(r.record_ge_n == std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(r.all_zero_n == std::vector<std::uint8_t>{1, 1, 1, 1});
  }
}

TEST_CASE("renewal D values equal the first deciding restart level, per timeline") {
  // D[i-1] = least l >= 1 such that running the dynamics from all ones
  // starting at level (i-l)T leaves the probe empty at (x, iT); 0 when no
  // level inside the window decides.  Checked bit for bit against forward
  // evolution on random histories.
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 3});
  const double T = 0.5;
  const int n_max = 6;
  const double t_back = 2.0;
  const std::vector<VertexId> probes(n_max, g.origin());
  for (int rep = 0; rep < 25; ++rep) {
    const EventTimeline tl =
        EventTimeline::generate(g, 0.5 + (rep % 3), {-t_back, n_max * T}, replica_key(99, rep));
    const RenewalRecord r = renewal_record(tl, probes, T);
    for (int i = 1; i <= n_max; ++i) {
      const int l_floor = i + int(std::floor(t_back / T + 1e-12));
      int found = 0;
      for (int l = 1; l <= l_floor; ++l) {
        const double s = (i - l) * T;
        const Trajectory tr = evolve(tl.slice(s, i * T), config_ones(g.vertex_count()));
        if (tr.bit_at(g.origin(), i * T) == 0) {
          found = l;
          break;
        }
      }
      CHECK(r.d[i - 1] == found);
      CHECK(r.censored[i - 1] == (found == 0 ? 1 : 0));
    }
  }
}

TEST_CASE("renewal curves nest the all-zero event inside the record event") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 4});
  std::vector<RenewalRecord> recs;
  const std::vector<VertexId> probes(5, g.origin());
  for (int rep = 0; rep < 400; ++rep) {
    const EventTimeline tl =
        EventTimeline::generate(g, 1.0, {-3.0, 5.0}, replica_key(100, rep));
    recs.push_back(renewal_record(tl, probes, 1.0));
  }
  const RenewalCurves c = renewal_curves(recs, kZ95, 5);
  CHECK(c.inclusion_violations == 0);
  CHECK(c.replicas == 400);
  for (int n = 0; n < c.n_max; ++n) {
    CHECK(c.all_zero[n].hits <= c.record[n].hits);
    if (n > 0) {
      CHECK(c.all_zero[n].hits <= c.all_zero[n - 1].hits);
      CHECK(c.record[n].hits <= c.record[n - 1].hits);
    }
  }
}

TEST_CASE("mixing curve: the cone total is the exact weighted sum") {
  // 4 replicas, 4 grid times; disagreement counts 4,2,1,0 out of 4.
  std::vector<BitRow> rows = {
      {1, 1, 1, 0}, {1, 1, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};
  const std::vector<double> s_grid{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> t_grid{0.0, 1.0};
  // Norms kept clear of the cone boundary so floating-point rounding of
  // tan(theta) cannot flip a membership decision.
  const std::vector<double> norms{0.0, 0.9, 1.9};
  const MixingCurve m =
      mixing_curve(rows, s_grid, t_grid, norms, 0.7853981633974483, 0.0, 3.0, kZ95);
  REQUIRE(m.delta.size() == 4);
  CHECK(m.delta[0].value == 1.0);
  CHECK(m.delta[1].value == 0.5);
  CHECK(m.delta[2].value == 0.25);
  CHECK(m.delta[3].value == 0.0);
  // The aggregate at height t sums delta(s) over grid times s >= t, each
  // weighted by the number of sites with norm <= (s - t) * tan(theta):
  // counts 1, 2, 3, 3 against lags 0, 1, 2, 3.
  const double phi0 = 1.0 * 1 + 0.5 * 2 + 0.25 * 3 + 0.0 * 3;
  const double phi1 = 0.5 * 1 + 0.25 * 2 + 0.0 * 3;
  CHECK(m.phi[0] == doctest::Approx(phi0).epsilon(1e-13));
  CHECK(m.phi[1] == doctest::Approx(phi1).epsilon(1e-13));
  CHECK(m.phi_decreasing);
}

TEST_CASE("mixing curve fits the planted exponential decay") {
  // delta(s) = (1/2)^s exactly, 1024 replicas, so counts are powers of two.
  std::vector<BitRow> rows(1024, BitRow(6, 0));
  const std::vector<double> s_grid{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  for (int si = 0; si < 6; ++si) {
    const int count = 1024 >> si;
    for (int r = 0; r < count; ++r) rows[r][si] = 1;
  }
  const std::vector<double> norms{0.0};
  const MixingCurve m = mixing_curve(rows, s_grid, {0.0, 1.0}, norms, 0.7853981633974483,
                                     0.0, 5.0, kZ95);
  REQUIRE(m.delta_fit.ok);
  CHECK(m.delta_fit.slope == doctest::Approx(-std::log(2.0)).epsilon(1e-10));
  CHECK(m.delta_fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.phi_decreasing);
  CHECK(m.pass);
}

TEST_CASE("obstruction table reproduces the hand arithmetic") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 22});
  Estimate nu0;
  nu0.value = 0.25;
  nu0.lo = 0.2;
  nu0.hi = 0.3;
  nu0.hits = 25;
  nu0.n = 100;
  const std::vector<int> ns{5, 10, 20};
  const std::vector<double> Ts{1.0, 10.0, 100.0};
  const ObstructionTable tab = obstruction_table(g, 2.0, nu0, ns, Ts);
  REQUIRE(tab.rows.size() == 9);
  CHECK(tab.max_degree == 2);

  auto row = [&](int n, double T) -> const ObstructionRow& {
    for (const ObstructionRow& r : tab.rows) {
      if (r.n == n && r.T == T) return r;
    }
    FAIL("row not found");
    return tab.rows[0];
  };
  // Independently computed: (B(-log nu0) + lambda*2*S*T) / (B*T), B = 2n+1, S = 2.
  CHECK(row(5, 1.0).rate_max == doctest::Approx(2.113567088392618).epsilon(1e-13));
  CHECK(row(5, 10.0).rate_max == doctest::Approx(0.8659021633847164).epsilon(1e-13));
  CHECK(row(10, 1.0).rate_max == doctest::Approx(1.7672467420722715).epsilon(1e-13));
  CHECK(row(20, 100.0).rate_max == doctest::Approx(0.20898489483071112).epsilon(1e-13));
  CHECK(row(5, 1.0).ball == 11);
  CHECK(row(5, 1.0).shell == 2);
  for (const ObstructionRow& r : tab.rows) {
    CHECK(r.rate_lo < r.rate_max);
    CHECK(r.rate_max < r.rate_hi);
  }
  CHECK(tab.decreasing_in_n);
  CHECK(tab.decreasing_in_t);
  CHECK(tab.pass);

  // The large-T limit approaches lambda * d_max * S / B.
  const ObstructionTable big = obstruction_table(g, 2.0, nu0, std::vector<int>{5},
                                                 std::vector<double>{1e6});
  CHECK(big.rows[0].rate_max == doctest::Approx(8.0 / 11.0).epsilon(1e-5));
}

TEST_CASE("obstruction table rejects degenerate occupancy estimates") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 8});
  Estimate bad;
  bad.value = 0.0;
  bad.lo = 0.0;
  bad.hi = 0.1;
  const std::vector<int> ns{2};
  const std::vector<double> Ts{1.0};
  CHECK_THROWS(obstruction_table(g, 1.0, bad, ns, Ts));
}

TEST_CASE("covariance scan stays calm on independent bits and fires on planted anticorrelation") {
  RngStream s({5150, 1});
  std::vector<BitRow> rows;
  for (int r = 0; r < 4000; ++r) {
    BitRow row(5);
    for (int c = 0; c < 4; ++c) row[c] = s.next_bernoulli(0.5) ? 1 : 0;
    row[4] = row[0] ? 0 : 1;  // perfectly anticorrelated with column 0
    rows.push_back(row);
  }

  std::vector<CovarianceProbe> calm;
  calm.push_back({0, 1, {2}});
  calm.push_back({1, 3, {0}});
  calm.push_back({2, 3, {}});
  const CovarianceScan ok = covariance_scan(rows, calm, 3.0, 50);
  CHECK(ok.pass);
  CHECK(ok.starved_rows == 0);
  for (const auto& row : ok.rows) CHECK(row.hits >= 50);

  std::vector<CovarianceProbe> hot;
  hot.push_back({0, 4, {1}});
  const CovarianceScan bad = covariance_scan(rows, hot, 3.0, 50);
  CHECK(!bad.pass);
  CHECK(bad.worst_z < -10.0);
  CHECK(bad.rows[0].cov == doctest::Approx(-0.25).epsilon(0.05));

  std::vector<CovarianceProbe> thirsty;
  thirsty.push_back({0, 1, {2, 3}});
  const CovarianceScan st = covariance_scan(rows, thirsty, 3.0, 4000);
  CHECK(st.starved_rows == 1);
}

}  // TEST_SUITE
