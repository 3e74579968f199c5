#include "cplab/ctmc.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cplab/util.hpp"

namespace cplab {

double ExactDistribution::prob(const Configuration& c) const {
  require(c.bits.size() == vertices, "ExactDistribution::prob: size mismatch");
  return p[config_index(c)];
}

double ExactDistribution::marginal_one(VertexId v) const {
  require(v < vertices, "ExactDistribution::marginal_one: vertex out of range");
  double m = 0.0;
  for (std::uint32_t s = 0; s < p.size(); ++s) {
    if (s & (1u << v)) m += p[s];
  }
  return m;
}

double ExactDistribution::mass() const {
  double m = 0.0;
  for (double q : p) m += q;
  return m;
}

std::uint32_t config_index(const Configuration& c) {
  require(c.bits.size() <= kMaxExactVertices, "config_index: too many vertices");
  std::uint32_t idx = 0;
  for (std::size_t v = 0; v < c.bits.size(); ++v) {
    if (c.bits[v]) idx |= 1u << v;
  }
  return idx;
}

Configuration config_of_index(std::uint32_t idx, VertexId n) {
  Configuration c = config_zero(n);
  for (VertexId v = 0; v < n; ++v) c.bits[v] = (idx >> v) & 1u;
  return c;
}

namespace {

// Dense generator: rows indexed by source state. A 1 at vertex x recovers at
// rate 1; a 0 at vertex x switches on at rate lambda * (occupied neighbours).
Eigen::MatrixXd generator(const GraphTopology& g, double lambda) {
  const VertexId n = g.vertex_count();
  require(n <= kMaxExactVertices, "exact distribution: graph too large for 2^V states");
  const std::uint32_t states = 1u << n;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(states, states);
  for (std::uint32_t s = 0; s < states; ++s) {
    double out = 0.0;
    for (VertexId x = 0; x < n; ++x) {
      const std::uint32_t bit = 1u << x;
      if (s & bit) {
        q(s, s ^ bit) += 1.0;
        out += 1.0;
      } else if (lambda > 0.0) {
        int occupied = 0;
        for (VertexId y : g.neighbors(x)) {
          if (s & (1u << y)) ++occupied;
        }
        if (occupied > 0) {
          const double rate = lambda * occupied;
          q(s, s ^ bit) += rate;
          out += rate;
        }
      }
    }
    q(s, s) = -out;
  }
  return q;
}

void check_inputs(const GraphTopology& g, double lambda, const Configuration& initial, double t) {
  require(lambda >= 0.0, "exact distribution: negative rate");
  require(t >= 0.0, "exact distribution: negative time");
  require(initial.bits.size() == g.vertex_count(), "exact distribution: configuration mismatch");
}

}  // namespace

ExactDistribution exact_distribution(const GraphTopology& g, double lambda,
                                     const Configuration& initial, double t) {
  check_inputs(g, lambda, initial, t);
  const VertexId n = g.vertex_count();
  const std::uint32_t states = 1u << n;

  const Eigen::MatrixXd q = generator(g, lambda);
  const Eigen::MatrixXd pt = (q.transpose() * t).exp();
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(states);
  p0(config_index(initial)) = 1.0;
  const Eigen::VectorXd pv = pt * p0;

  ExactDistribution out;
  out.vertices = n;
  out.lambda = lambda;
  out.t = t;
  out.p.assign(pv.data(), pv.data() + states);
  require(std::abs(out.mass() - 1.0) < 1e-12, "exact distribution: mass drifted from 1");
  return out;
}

ExactDistribution exact_distribution_uniformized(const GraphTopology& g, double lambda,
                                                 const Configuration& initial, double t,
                                                 double tol) {
  check_inputs(g, lambda, initial, t);
  require(tol > 0.0, "exact distribution: tolerance must be positive");
  const VertexId n = g.vertex_count();
  const std::uint32_t states = 1u << n;

  const Eigen::MatrixXd q = generator(g, lambda);
  double rate = 0.0;
  for (std::uint32_t s = 0; s < states; ++s) rate = std::max(rate, -q(s, s));

  ExactDistribution out;
  out.vertices = n;
  out.lambda = lambda;
  out.t = t;

  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(states);
  v(config_index(initial)) = 1.0;

  if (rate * t == 0.0) {
    out.p.assign(v.data(), v.data() + states);
    return out;
  }

  // Jump matrix of the uniformized chain.
  const Eigen::MatrixXd jump = Eigen::MatrixXd::Identity(states, states) + q / rate;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(states);

  // Poisson(rate*t) weights, accumulated until the tail is below tol.
  const double a = rate * t;
  double logw = -a;  // log of the k = 0 weight
  double covered = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    if (k > 0) {
      logw += std::log(a / static_cast<double>(k));
      v = v * jump;
    }
    const double w = std::exp(logw);
    acc += w * v;
    covered += w;
    if (covered >= 1.0 - tol) break;
    require(k < 100000, "exact distribution: uniformization did not converge");
  }

  out.p.assign(acc.data(), acc.data() + states);
  // The truncated tail mass is below tol by construction; fold it back in
  // proportionally so the result is a probability vector.
  const double m = out.mass();
  for (double& q2 : out.p) q2 /= m;
  return out;
}

}  // namespace cplab
