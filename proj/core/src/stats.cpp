#include "cplab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cplab/util.hpp"

namespace cplab {

double normal_two_sided_tail(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

Estimate wilson_estimate(std::uint64_t hits, std::uint64_t n, double z) {
  require(hits <= n, "wilson_estimate: hits exceed trials");
  require(z > 0.0, "wilson_estimate: z must be positive");
  Estimate e;
  e.hits = hits;
  e.n = n;
  if (n == 0) return e;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  e.value = p;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  e.lo = std::max(0.0, center - half);
  e.hi = std::min(1.0, center + half);
  return e;
}

Estimate mean_estimate(std::span<const double> xs, double z) {
  Estimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  const double se = std::sqrt(var / static_cast<double>(xs.size()));
  e.value = mean;
  e.lo = mean - z * se;
  e.hi = mean + z * se;
  return e;
}

bool estimates_compatible(const Estimate& a, const Estimate& b, double z) {
  const double se_a = a.stderr_from_interval(z);
  const double se_b = b.stderr_from_interval(z);
  const double gap = std::abs(a.value - b.value);
  return gap <= z * std::sqrt(se_a * se_a + se_b * se_b) + 1e-15;
}

namespace {

// log(n choose k) via lgamma.
double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binom_pmf(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lp = log_choose(n, k) + static_cast<double>(k) * std::log(p) +
                    static_cast<double>(n - k) * std::log1p(-p);
  return std::exp(lp);
}

}  // namespace

double binomial_two_sided_p(std::uint64_t hits, std::uint64_t n, double p) {
  require(hits <= n, "binomial_two_sided_p: hits exceed trials");
  require(p >= 0.0 && p <= 1.0, "binomial_two_sided_p: p outside [0,1]");
  if (n == 0) return 1.0;
  // Sum the probabilities of all outcomes no more likely than the observed
  // one (the minimum-likelihood two-sided convention).
  const double obs = binom_pmf(hits, n, p);
  const double slack = obs * 1e-12;
  double total = 0.0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const double q = binom_pmf(k, n, p);
    if (q <= obs + slack) total += q;
  }
  return std::min(1.0, total);
}

LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "least_squares: length mismatch");
  LineFit f;
  f.points = static_cast<int>(xs.size());
  if (xs.size() < 3) return f;
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  const double dof = n - 2.0;
  f.slope_stderr = dof > 0.0 ? std::sqrt(sse / dof / sxx) : 0.0;
  f.ok = true;
  return f;
}

LineFit log_linear_fit(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "log_linear_fit: length mismatch");
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] > 0.0) {
      fx.push_back(xs[i]);
      fy.push_back(std::log(ys[i]));
    }
  }
  return least_squares(fx, fy);
}

}  // namespace cplab
