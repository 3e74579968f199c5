// Estimators that turn replicated simulation output into the quantities the
// experiments report: all-zero curves with their implied occupancy bound,
// conditional occupancy checks, zero-run surfaces, extinction-tail fits,
// renewal records, disagreement/mixing curves, the spectral-obstruction
// table, and conditional-covariance scans.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cplab/harris.hpp"
#include "cplab/stats.hpp"
#include "cplab/topology.hpp"

namespace cplab {

using BitRow = std::vector<std::uint8_t>;  // one replica's bits over a grid

// ---------------------------------------------------------------------------
// All-zero curve
// ---------------------------------------------------------------------------

// From per-replica indicator sequences Y_1..Y_m (columns of `rows`), estimate
// q_n = P(Y_1 = ... = Y_n = 0) for n = 1..n_max and the implied per-index
// occupancy floor rho = 1 - sup_n q_n^(1/n).  `rho_floor` uses the upper
// interval ends (a conservative floor), `rho_floor_point` the point
// estimates.  The curve passes when the conservative floor is positive,
// which is exactly the statement q_n <= (1 - rho)^n for all measured n.
struct AllZeroCurve {
  int n_max = 0;
  std::uint64_t replicas = 0;
  std::vector<Estimate> q;  // q[n-1] for n = 1..n_max
  double rho_floor_point = 0.0;
  double rho_floor = 0.0;
  bool pass = false;
};

AllZeroCurve allzero_curve(const std::vector<BitRow>& rows, int n_max, double z);

// ---------------------------------------------------------------------------
// Conditional occupancy
// ---------------------------------------------------------------------------

// P(bit at `target` = 1 | bits at `given_zero` all 0), with the bound it is
// compared against.  `starved` is set when fewer than `min_hits` replicas
// satisfy the condition; a starved check is inconclusive, not a failure.
struct ConditionalCheck {
  Estimate conditional;
  double floor = 0.0;       // the value the conditional must not fall below
  std::uint64_t condition_hits = 0;
  bool starved = false;
  bool pass = false;        // conditional's upper end >= floor (when not starved)
};

ConditionalCheck conditional_criterion(const std::vector<BitRow>& rows, std::uint32_t target,
                                       std::span<const std::uint32_t> given_zero, double floor,
                                       double z, std::uint64_t min_hits = 200);

// ---------------------------------------------------------------------------
// Zero-run surface
// ---------------------------------------------------------------------------

// f(t, u) = P(site 0-run on [0, t) | site 0-run on [-u, 0)), estimated on a
// (t, u) grid from per-replica site paths; u = 0 rows are unconditional.
struct ZeroRunSurface {
  std::vector<double> t_grid;
  std::vector<double> u_grid;
  std::vector<std::vector<Estimate>> f;  // f[ui][ti]
  bool monotone_in_u = true;   // non-decreasing in u within 2 stderr
  bool monotone_in_t = true;   // non-increasing in t within 2 stderr
  std::uint64_t min_condition_hits = 0;
};

ZeroRunSurface zero_run_surface(std::span<const SitePath> paths, std::vector<double> t_grid,
                                std::vector<double> u_grid, double z);

// ---------------------------------------------------------------------------
// Extinction tail
// ---------------------------------------------------------------------------

// Tail of the absorption time among replicas that die: estimates
// P(s < tau < infinity) on a grid of s and fits log P = a - c s beyond s0.
struct ExtinctionTail {
  std::uint64_t finite = 0;
  std::uint64_t censored = 0;
  Estimate survival;              // censored fraction
  std::vector<double> s_grid;
  std::vector<Estimate> tail;     // P(s < tau < infinity), denominator all replicas
  LineFit fit;                    // log tail vs s on s >= s0
  double s0 = 0.0;
  double rate = 0.0;              // -slope
  double rate_lo = 0.0, rate_hi = 0.0;
  bool pass = false;              // fit ok, rate > 0 at the interval floor, r2 >= 0.9
};

ExtinctionTail extinction_tail(std::span<const ExtinctionSample> samples, double s0,
                               int grid_points, double z);

// ---------------------------------------------------------------------------
// Renewal records
// ---------------------------------------------------------------------------

// For probes (x_i, i*T), i = 1..n_max, on one timeline: D[i-1] is the least
// integer l >= 1 with the probe's backward trace dead below level (i-l)*T
// (0 when the trace survives to the window floor, i.e. "no such l" as far as
// the window shows; `censored` marks those).  From the D's, a record walk
// accumulates S_0 = 0, S_{j+1} = S_j + D[n - S_j - 1]; `record_ge_n` says the
// walk reached n before hitting an infinite D, and `all_zero_n` says all of
// the first n probes read 0.  Containment of the all-zero event in the
// record event is structural and is asserted by tests per replica.
struct RenewalRecord {
  std::vector<std::int32_t> d;        // n_max entries; 0 = no finite value in window
  std::vector<std::uint8_t> censored;
  std::vector<std::uint8_t> all_zero_n;    // [n-1]: probes 1..n all read 0
  std::vector<std::uint8_t> record_ge_n;   // [n-1]: record walk reaches n
};

RenewalRecord renewal_record(const EventTimeline& tl, std::span<const VertexId> probes, double T);

struct RenewalCurves {
  int n_max = 0;
  std::uint64_t replicas = 0;
  std::vector<Estimate> all_zero;   // P(first n probes all 0)
  std::vector<Estimate> record;     // P(record walk reaches n)
  std::uint64_t inclusion_violations = 0;  // all_zero outside record (must be 0)
  double censor_fraction = 0.0;
  LineFit record_fit;               // log P(record >= n) vs n where counts suffice
  bool pass = false;
};

RenewalCurves renewal_curves(std::span<const RenewalRecord> records, double z,
                             std::uint64_t min_fit_hits = 10);

// ---------------------------------------------------------------------------
// Disagreement / mixing curve
// ---------------------------------------------------------------------------

// rows[r][si]: indicator that the two coupled trajectories of replica r
// disagree at the observation vertex at time s_grid[si].  site_norms are the
// Euclidean norms of the observed sublattice sites; the aggregate
// phi(t) = sum over grid times s >= t of delta(s) * #{sites with norm <=
// (s - t) * tan(theta)} totals the disagreement mass inside the cone with
// apex at height t (evaluated on the finite site/time grid).
struct MixingCurve {
  std::vector<double> s_grid;
  std::vector<Estimate> delta;
  std::vector<double> t_grid;
  std::vector<double> phi;
  LineFit delta_fit;       // log delta vs s on [fit_lo, fit_hi]
  double fit_lo = 0.0, fit_hi = 0.0;
  bool phi_decreasing = true;
  bool pass = false;       // fit ok, slope < 0, r2 >= 0.85, phi decreasing
};

MixingCurve mixing_curve(const std::vector<BitRow>& rows, std::vector<double> s_grid,
                         std::vector<double> t_grid, std::span<const double> site_norms,
                         double theta, double fit_lo, double fit_hi, double z);

// ---------------------------------------------------------------------------
// Spectral obstruction table
// ---------------------------------------------------------------------------

// Given an estimate nu0 of the probability that the stationary process reads
// 0 at the origin, tabulate over (n, T) the largest decay rate compatible
// with the ball counts:
//   rate_max(n, T) = (|B(n)| * (-log nu0) + lambda * d_max * |B(n+1)\B(n)| * T)
//                    / (gamma * |B(n)| * T).
struct ObstructionRow {
  int n = 0;
  double T = 0.0;
  double rate_max = 0.0;
  double rate_lo = 0.0, rate_hi = 0.0;  // from the nu0 interval
  std::uint64_t ball = 0, shell = 0;
};

struct ObstructionTable {
  Estimate nu0;
  double lambda = 0.0;
  std::uint32_t max_degree = 0;
  double gamma = 1.0;
  std::vector<ObstructionRow> rows;
  bool decreasing_in_n = true;  // at fixed T
  bool decreasing_in_t = true;  // at fixed n
  bool pass = false;
};

ObstructionTable obstruction_table(const GraphTopology& g, double lambda, Estimate nu0,
                                   std::span<const int> n_grid, std::span<const double> t_grid,
                                   double gamma = 1.0);

// ---------------------------------------------------------------------------
// Conditional covariance scan
// ---------------------------------------------------------------------------

// Covariance of the bits at two grid columns, conditioned on zeros at a set
// of other columns.  Negative covariance beyond `z_alarm` plug-in standard
// errors is flagged.
struct CovarianceScan {
  struct Row {
    std::uint32_t x = 0, y = 0;
    std::vector<std::uint32_t> given_zero;
    double cov = 0.0;
    double stderr_ = 0.0;
    std::uint64_t hits = 0;
    bool starved = false;
    double zscore = 0.0;
  };
  std::vector<Row> rows;
  double worst_z = 0.0;  // most negative covariance z-score seen
  std::uint64_t starved_rows = 0;
  bool pass = false;     // no row with cov significantly negative
};

struct CovarianceProbe {
  std::uint32_t x = 0, y = 0;
  std::vector<std::uint32_t> given_zero;
};

CovarianceScan covariance_scan(const std::vector<BitRow>& rows,
                               std::span<const CovarianceProbe> probes, double z_alarm,
                               std::uint64_t min_hits = 200);

}  // namespace cplab
