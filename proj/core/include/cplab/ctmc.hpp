// Exact transient distribution of the dynamics on a small graph, computed
// from the 2^V-state continuous-time Markov chain.  Two independent numeric
// routes are provided — a dense matrix exponential and uniformization — so
// each can vouch for the other before either is used as a reference value
// for the event-driven simulator.
#pragma once

#include <cstdint>
#include <vector>

#include "cplab/harris.hpp"
#include "cplab/topology.hpp"

namespace cplab {

struct ExactDistribution {
  VertexId vertices = 0;
  double lambda = 0.0;
  double t = 0.0;
  std::vector<double> p;  // probability of each configuration; index bit v = state of vertex v

  double prob(const Configuration& c) const;
  double marginal_one(VertexId v) const;
  double mass() const;  // should be 1 up to roundoff
};

inline constexpr VertexId kMaxExactVertices = 12;

// State index of a configuration (bit v of the index = c.bits[v]).
std::uint32_t config_index(const Configuration& c);
Configuration config_of_index(std::uint32_t idx, VertexId n);

// Dense matrix-exponential route.
ExactDistribution exact_distribution(const GraphTopology& g, double lambda,
                                     const Configuration& initial, double t);

// Uniformization route (Poisson-weighted powers of the jump matrix), with the
// series truncated once the remaining Poisson mass is below `tol`.
ExactDistribution exact_distribution_uniformized(const GraphTopology& g, double lambda,
                                                 const Configuration& initial, double t,
                                                 double tol = 1e-12);

}  // namespace cplab
