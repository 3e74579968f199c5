#include "cplab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "cplab/util.hpp"

namespace cplab {

// ---------------------------------------------------------------------------
// All-zero curve
// ---------------------------------------------------------------------------

AllZeroCurve allzero_curve(const std::vector<BitRow>& rows, int n_max, double z) {
  require(n_max >= 1, "allzero_curve: n_max must be >= 1");
  AllZeroCurve c;
  c.n_max = n_max;
  c.replicas = rows.size();
  for (const BitRow& r : rows) {
    require(static_cast<int>(r.size()) >= n_max, "allzero_curve: row shorter than n_max");
  }

  std::vector<std::uint64_t> hits(static_cast<std::size_t>(n_max), 0);
  for (const BitRow& r : rows) {
    int n = 0;
    while (n < n_max && r[static_cast<std::size_t>(n)] == 0) {
      ++hits[static_cast<std::size_t>(n)];
      ++n;
    }
  }
  double worst_point = 0.0, worst_upper = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const Estimate e = wilson_estimate(hits[static_cast<std::size_t>(n - 1)], rows.size(), z);
    c.q.push_back(e);
    worst_point = std::max(worst_point, std::pow(e.value, 1.0 / n));
    worst_upper = std::max(worst_upper, std::pow(e.hi, 1.0 / n));
  }
  c.rho_floor_point = 1.0 - worst_point;
  c.rho_floor = 1.0 - worst_upper;
  c.pass = c.rho_floor > 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Conditional occupancy
// ---------------------------------------------------------------------------

ConditionalCheck conditional_criterion(const std::vector<BitRow>& rows, std::uint32_t target,
                                       std::span<const std::uint32_t> given_zero, double floor,
                                       double z, std::uint64_t min_hits) {
  ConditionalCheck out;
  out.floor = floor;
  std::uint64_t cond = 0, hit = 0;
  for (const BitRow& r : rows) {
    bool ok = true;
    for (std::uint32_t g : given_zero) {
      require(g < r.size(), "conditional_check: column out of range");
      if (r[g] != 0) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    ++cond;
    require(target < r.size(), "conditional_check: target out of range");
    if (r[target] != 0) ++hit;
  }
  out.condition_hits = cond;
  out.conditional = wilson_estimate(hit, cond, z);
  out.starved = cond < min_hits;
  out.pass = !out.starved && out.conditional.hi >= floor;
  return out;
}

// ---------------------------------------------------------------------------
// Zero-run surface
// ---------------------------------------------------------------------------

ZeroRunSurface zero_run_surface(std::span<const SitePath> paths, std::vector<double> t_grid,
                                std::vector<double> u_grid, double z) {
  ZeroRunSurface s;
  s.t_grid = std::move(t_grid);
  s.u_grid = std::move(u_grid);
  require(!s.t_grid.empty() && !s.u_grid.empty(), "zero_run_surface: empty grid");
  for (const SitePath& p : paths) {
    require(p.t0 <= -s.u_grid.back() && p.t1 >= s.t_grid.back(),
            "zero_run_surface: paths do not cover the grid");
  }

  s.min_condition_hits = paths.size();
  for (double u : s.u_grid) {
    std::vector<Estimate> row;
    std::uint64_t cond = 0;
    std::vector<std::uint64_t> hits(s.t_grid.size(), 0);
    for (const SitePath& p : paths) {
      if (u > 0.0 && !p.zero_run(-u, 0.0)) continue;
      ++cond;
      for (std::size_t ti = 0; ti < s.t_grid.size(); ++ti) {
        if (p.zero_run(0.0, s.t_grid[ti])) ++hits[ti];
      }
    }
    s.min_condition_hits = std::min(s.min_condition_hits, cond);
    for (std::size_t ti = 0; ti < s.t_grid.size(); ++ti) {
      row.push_back(wilson_estimate(hits[ti], cond, z));
    }
    s.f.push_back(std::move(row));
  }

  // Monotone in u (non-decreasing) and in t (non-increasing), each within
  // two combined standard errors.
  auto se = [&](const Estimate& e) { return e.stderr_from_interval(z); };
  for (std::size_t ui = 0; ui + 1 < s.u_grid.size(); ++ui) {
    for (std::size_t ti = 0; ti < s.t_grid.size(); ++ti) {
      const Estimate& a = s.f[ui][ti];
      const Estimate& b = s.f[ui + 1][ti];
      if (b.value < a.value - 2.0 * std::hypot(se(a), se(b))) s.monotone_in_u = false;
    }
  }
  for (std::size_t ui = 0; ui < s.u_grid.size(); ++ui) {
    for (std::size_t ti = 0; ti + 1 < s.t_grid.size(); ++ti) {
      const Estimate& a = s.f[ui][ti];
      const Estimate& b = s.f[ui][ti + 1];
      if (b.value > a.value + 2.0 * std::hypot(se(a), se(b))) s.monotone_in_t = false;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Extinction tail
// ---------------------------------------------------------------------------

ExtinctionTail extinction_tail(std::span<const ExtinctionSample> samples, double s0,
                               int grid_points, double z) {
  require(grid_points >= 3, "extinction_tail: need at least 3 grid points");
  ExtinctionTail t;
  t.s0 = s0;
  double max_tau = 0.0;
  for (const ExtinctionSample& s : samples) {
    if (s.censored) {
      ++t.censored;
    } else {
      ++t.finite;
      max_tau = std::max(max_tau, s.tau);
    }
  }
  t.survival = wilson_estimate(t.censored, samples.size(), z);

  // Grid from s0 up to just below the largest finite absorption time, so the
  // last point keeps a nonzero count.
  const double top = std::max(s0 + 1.0, max_tau * 0.9);
  for (int i = 0; i < grid_points; ++i) {
    const double s = s0 + (top - s0) * i / (grid_points - 1);
    std::uint64_t hits = 0;
    for (const ExtinctionSample& smp : samples) {
      if (!smp.censored && smp.tau > s) ++hits;
    }
    t.s_grid.push_back(s);
    t.tail.push_back(wilson_estimate(hits, samples.size(), z));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.s_grid.size(); ++i) {
    if (t.tail[i].hits > 0) {
      xs.push_back(t.s_grid[i]);
      ys.push_back(t.tail[i].value);
    }
  }
  t.fit = log_linear_fit(xs, ys);
  t.rate = -t.fit.slope;
  t.rate_lo = -t.fit.slope - 2.0 * t.fit.slope_stderr;
  t.rate_hi = -t.fit.slope + 2.0 * t.fit.slope_stderr;
  t.pass = t.fit.ok && t.rate_lo > 0.0 && t.fit.r2 >= 0.9;
  return t;
}

// ---------------------------------------------------------------------------
// Renewal records
// ---------------------------------------------------------------------------

RenewalRecord renewal_record(const EventTimeline& tl, std::span<const VertexId> probes, double T) {
  require(T > 0.0, "renewal_record: step must be positive");
  const int n_max = static_cast<int>(probes.size());
  require(n_max >= 1, "renewal_record: no probes");
  require(tl.window().t1 >= T * n_max, "renewal_record: window too short for the probes");

  RenewalRecord rec;
  rec.d.assign(probes.size(), 0);
  rec.censored.assign(probes.size(), 0);

  const double floor_time = tl.window().t0;
  std::vector<std::uint8_t> probe_zero(probes.size(), 0);
  for (int i = 1; i <= n_max; ++i) {
    const BackwardTrace tr = backward_trace(tl, probes[i - 1], T * i, floor_time);
    if (tr.died) {
      // Least l >= 1 with level T*(i-l) strictly below the death time.
      const double q = i - tr.death_time / T;
      int l = static_cast<int>(std::floor(q)) + 1;
      if (l < 1) l = 1;
      rec.d[static_cast<std::size_t>(i - 1)] = l;
      probe_zero[static_cast<std::size_t>(i - 1)] = 1;
    } else {
      rec.censored[static_cast<std::size_t>(i - 1)] = 1;
    }
  }

  rec.all_zero_n.assign(probes.size(), 0);
  rec.record_ge_n.assign(probes.size(), 0);
  bool all = true;
  for (int n = 1; n <= n_max; ++n) {
    all = all && probe_zero[static_cast<std::size_t>(n - 1)];
    rec.all_zero_n[static_cast<std::size_t>(n - 1)] = all ? 1 : 0;

    // Record walk: start at 0, repeatedly jump by the D-value indexed from
    // the top (n - position); reaching n before an unavailable D succeeds.
    int pos = 0;
    bool reached = false;
    for (;;) {
      if (pos >= n) {
        reached = true;
        break;
      }
      const int idx = n - pos;  // in 1..n
      const std::int32_t dj = rec.d[static_cast<std::size_t>(idx - 1)];
      if (dj <= 0) break;
      pos += dj;
    }
    rec.record_ge_n[static_cast<std::size_t>(n - 1)] = reached ? 1 : 0;
  }
  return rec;
}

RenewalCurves renewal_curves(std::span<const RenewalRecord> records, double z,
                             std::uint64_t min_fit_hits) {
  require(!records.empty(), "renewal_curves: no records");
  RenewalCurves c;
  c.n_max = static_cast<int>(records[0].d.size());
  c.replicas = records.size();

  std::vector<std::uint64_t> az(static_cast<std::size_t>(c.n_max), 0);
  std::vector<std::uint64_t> rec_hits(static_cast<std::size_t>(c.n_max), 0);
  std::uint64_t censored = 0, total_d = 0;
  for (const RenewalRecord& r : records) {
    require(static_cast<int>(r.d.size()) == c.n_max, "renewal_curves: ragged records");
    for (int n = 0; n < c.n_max; ++n) {
      az[static_cast<std::size_t>(n)] += r.all_zero_n[static_cast<std::size_t>(n)];
      rec_hits[static_cast<std::size_t>(n)] += r.record_ge_n[static_cast<std::size_t>(n)];
      if (r.all_zero_n[static_cast<std::size_t>(n)] && !r.record_ge_n[static_cast<std::size_t>(n)]) {
        ++c.inclusion_violations;
      }
      censored += r.censored[static_cast<std::size_t>(n)];
      ++total_d;
    }
  }
  c.censor_fraction = static_cast<double>(censored) / static_cast<double>(total_d);

  std::vector<double> xs, ys;
  for (int n = 1; n <= c.n_max; ++n) {
    c.all_zero.push_back(wilson_estimate(az[static_cast<std::size_t>(n - 1)], c.replicas, z));
    c.record.push_back(wilson_estimate(rec_hits[static_cast<std::size_t>(n - 1)], c.replicas, z));
    if (rec_hits[static_cast<std::size_t>(n - 1)] >= min_fit_hits) {
      xs.push_back(n);
      ys.push_back(c.record.back().value);
    }
  }
  c.record_fit = log_linear_fit(xs, ys);
  c.pass = c.inclusion_violations == 0 && c.record_fit.ok && c.record_fit.slope < 0.0 &&
           c.record_fit.r2 >= 0.9;
  return c;
}

// ---------------------------------------------------------------------------
// Disagreement / mixing curve
// ---------------------------------------------------------------------------

MixingCurve mixing_curve(const std::vector<BitRow>& rows, std::vector<double> s_grid,
                         std::vector<double> t_grid, std::span<const double> site_norms,
                         double theta, double fit_lo, double fit_hi, double z) {
  MixingCurve m;
  m.s_grid = std::move(s_grid);
  m.t_grid = std::move(t_grid);
  m.fit_lo = fit_lo;
  m.fit_hi = fit_hi;
  require(theta > 0.0 && theta < 1.5707963267948966, "mixing_curve: angle outside (0, pi/2)");

  std::vector<std::uint64_t> hits(m.s_grid.size(), 0);
  for (const BitRow& r : rows) {
    require(r.size() == m.s_grid.size(), "mixing_curve: row/grid size mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) hits[i] += r[i];
  }
  for (std::size_t i = 0; i < m.s_grid.size(); ++i) {
    m.delta.push_back(wilson_estimate(hits[i], rows.size(), z));
  }

  const double slope = std::tan(theta);
  std::vector<double> sorted_norms(site_norms.begin(), site_norms.end());
  std::sort(sorted_norms.begin(), sorted_norms.end());
  for (double t : m.t_grid) {
    double phi = 0.0;
    for (std::size_t i = 0; i < m.s_grid.size(); ++i) {
      const double s = m.s_grid[i];
      if (s < t) continue;
      const double reach = (s - t) * slope;
      const auto inside = std::upper_bound(sorted_norms.begin(), sorted_norms.end(), reach) -
                          sorted_norms.begin();
      phi += m.delta[i].value * static_cast<double>(inside);
    }
    m.phi.push_back(phi);
  }
  for (std::size_t i = 0; i + 1 < m.phi.size(); ++i) {
    if (m.phi[i + 1] > m.phi[i] + 1e-12) m.phi_decreasing = false;
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < m.s_grid.size(); ++i) {
    if (m.s_grid[i] >= fit_lo && m.s_grid[i] <= fit_hi && m.delta[i].hits > 0) {
      xs.push_back(m.s_grid[i]);
      ys.push_back(m.delta[i].value);
    }
  }
  m.delta_fit = log_linear_fit(xs, ys);
  m.pass = m.delta_fit.ok && m.delta_fit.slope + 2.0 * m.delta_fit.slope_stderr < 0.0 &&
           m.delta_fit.r2 >= 0.85 && m.phi_decreasing;
  return m;
}

// ---------------------------------------------------------------------------
// Spectral obstruction table
// ---------------------------------------------------------------------------

ObstructionTable obstruction_table(const GraphTopology& g, double lambda, Estimate nu0,
                                   std::span<const int> n_grid, std::span<const double> t_grid,
                                   double gamma) {
  require(nu0.value > 0.0 && nu0.value < 1.0, "obstruction_table: nu0 must be inside (0,1)");
  require(nu0.lo > 0.0 && nu0.hi < 1.0,
          "obstruction_table: nu0 interval must be inside (0,1); more replicas needed");
  require(gamma > 0.0, "obstruction_table: gamma must be positive");

  ObstructionTable tab;
  tab.nu0 = nu0;
  tab.lambda = lambda;
  tab.gamma = gamma;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    tab.max_degree = std::max(tab.max_degree, g.degree(v));
  }

  const VertexId o = g.origin();
  auto rate_for = [&](double nu, std::uint64_t b, std::uint64_t shell, double T) {
    const double l0 = -std::log(nu);
    return (static_cast<double>(b) * l0 +
            lambda * tab.max_degree * static_cast<double>(shell) * T) /
           (gamma * static_cast<double>(b) * T);
  };

  for (int n : n_grid) {
    require(n >= 1, "obstruction_table: radii must be >= 1");
    const std::uint64_t b = ball(g, o, static_cast<std::uint32_t>(n)).count();
    const std::uint64_t b1 = ball(g, o, static_cast<std::uint32_t>(n + 1)).count();
    const std::uint64_t shell = b1 - b;
    for (double T : t_grid) {
      require(T > 0.0, "obstruction_table: T must be positive");
      ObstructionRow row;
      row.n = n;
      row.T = T;
      row.ball = b;
      row.shell = shell;
      row.rate_max = rate_for(nu0.value, b, shell, T);
      row.rate_lo = rate_for(nu0.hi, b, shell, T);
      row.rate_hi = rate_for(nu0.lo, b, shell, T);
      tab.rows.push_back(row);
    }
  }

  // Monotonicity of the point value along each axis of the grid.
  const std::size_t tn = t_grid.size();
  for (std::size_t ni = 0; ni + 1 < n_grid.size(); ++ni) {
    for (std::size_t ti = 0; ti < tn; ++ti) {
      if (tab.rows[(ni + 1) * tn + ti].rate_max > tab.rows[ni * tn + ti].rate_max + 1e-12) {
        tab.decreasing_in_n = false;
      }
    }
  }
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    for (std::size_t ti = 0; ti + 1 < tn; ++ti) {
      if (tab.rows[ni * tn + ti + 1].rate_max > tab.rows[ni * tn + ti].rate_max + 1e-12) {
        tab.decreasing_in_t = false;
      }
    }
  }
  tab.pass = tab.decreasing_in_n && tab.decreasing_in_t;
  return tab;
}

// ---------------------------------------------------------------------------
// Conditional covariance scan
// ---------------------------------------------------------------------------

CovarianceScan covariance_scan(const std::vector<BitRow>& rows,
                               std::span<const CovarianceProbe> probes, double z_alarm,
                               std::uint64_t min_hits) {
  CovarianceScan scan;
  for (const CovarianceProbe& pr : probes) {
    CovarianceScan::Row row;
    row.x = pr.x;
    row.y = pr.y;
    row.given_zero = pr.given_zero;

    std::uint64_t n = 0, n11 = 0, n10 = 0, n01 = 0;
    for (const BitRow& r : rows) {
      bool ok = true;
      for (std::uint32_t g : pr.given_zero) {
        require(g < r.size(), "covariance_scan: column out of range");
        if (r[g] != 0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      ++n;
      const bool x = r[pr.x] != 0, y = r[pr.y] != 0;
      n11 += (x && y);
      n10 += (x && !y);
      n01 += (!x && y);
    }
    row.hits = n;
    row.starved = n < min_hits;
    if (!row.starved) {
      const double nn = static_cast<double>(n);
      const double px = static_cast<double>(n11 + n10) / nn;
      const double py = static_cast<double>(n11 + n01) / nn;
      const double p11 = static_cast<double>(n11) / nn;
      row.cov = p11 - px * py;
      // Plug-in delta-method variance of the sample covariance of a pair of
      // indicator variables: (m22 - cov^2) / n with m22 the centered fourth
      // joint moment, computable from the four cell frequencies.
      const double p10 = static_cast<double>(n10) / nn;
      const double p01 = static_cast<double>(n01) / nn;
      const double p00 = 1.0 - p11 - p10 - p01;
      auto sq = [](double v) { return v * v; };
      const double m22 = p11 * sq((1 - px) * (1 - py)) + p10 * sq((1 - px) * (0 - py)) +
                         p01 * sq((0 - px) * (1 - py)) + p00 * sq((0 - px) * (0 - py));
      const double var = std::max(0.0, (m22 - row.cov * row.cov) / nn);
      row.stderr_ = std::sqrt(var);
      row.zscore = row.stderr_ > 0.0 ? row.cov / row.stderr_ : 0.0;
      scan.worst_z = std::min(scan.worst_z, row.zscore);
    } else {
      ++scan.starved_rows;
    }
    scan.rows.push_back(std::move(row));
  }
  scan.pass = scan.worst_z > -z_alarm;
  return scan;
}

}  // namespace cplab
