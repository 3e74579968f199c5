// Small-sample interval estimates and least-squares fits used by the
// experiment reports.  Everything here is deterministic arithmetic on
// counts; random sampling lives elsewhere.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cplab {

// ---------------------------------------------------------------------------
// z-scores for the confidence levels used in reports.
// ---------------------------------------------------------------------------

inline constexpr double kZ90 = 1.6448536269514722;
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

// Two-sided tail mass of the standard normal beyond +/- z.
double normal_two_sided_tail(double z);

// ---------------------------------------------------------------------------
// Binomial proportion estimate with a Wilson score interval.
// ---------------------------------------------------------------------------

struct Estimate {
  double value = 0.0;    // point estimate (hits / n; 0 when n == 0)
  double lo = 0.0;       // lower interval end
  double hi = 0.0;       // upper interval end
  std::uint64_t hits = 0;
  std::uint64_t n = 0;

  // Half-width expressed as a normal-scale standard error.
  double stderr_from_interval(double z) const { return (hi - lo) / (2.0 * z); }
};

Estimate wilson_estimate(std::uint64_t hits, std::uint64_t n, double z);

// Mean and normal interval for real-valued samples.
Estimate mean_estimate(std::span<const double> xs, double z);

// True when the two intervals could describe the same underlying value:
// |a - b| <= z * sqrt(se_a^2 + se_b^2), with the standard errors recovered
// from the interval half-widths.
bool estimates_compatible(const Estimate& a, const Estimate& b, double z);

// Exact two-sided binomial tail probability of an observation at least as
// extreme as `hits` under Binomial(n, p): the standard small-count test used
// where a normal approximation would misbehave.  Returns the p-value.
double binomial_two_sided_p(std::uint64_t hits, std::uint64_t n, double p);

// ---------------------------------------------------------------------------
// Ordinary least squares on (x, y) pairs.
// ---------------------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  int points = 0;
  bool ok = false;  // at least 3 points and nonzero x spread
};

LineFit least_squares(std::span<const double> xs, std::span<const double> ys);

// Fit log(y) = intercept + slope * x over the points with y > 0.
LineFit log_linear_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace cplab
