// Processes built on top of the basic dynamics: independent spin-flips,
// the ray-constrained tree process, slab-restricted processes, Bernoulli
// initial fields, and space-time projections onto site/time grids.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cplab/analysis.hpp"
#include "cplab/harris.hpp"
#include "cplab/rng.hpp"
#include "cplab/stats.hpp"
#include "cplab/timeline.hpp"
#include "cplab/topology.hpp"

namespace cplab {

// ---------------------------------------------------------------------------
// Independent spin-flips
// ---------------------------------------------------------------------------

// Each vertex independently switches 0 -> 1 at rate `up` and 1 -> 0 at rate
// 1.  The single-site stationary occupancy is up / (up + 1).
struct SpinFlipParams {
  double up = 1.0;
  double stationary_density() const { return up / (up + 1.0); }
};

Trajectory spin_flip_evolve(const GraphTopology& g, SpinFlipParams params,
                            const Configuration& initial, TimeWindow window, RngKey key);

// ---------------------------------------------------------------------------
// Initial fields
// ---------------------------------------------------------------------------

// Independent Bernoulli(rho) occupancy on the vertices of `within` (all
// vertices when within == nullptr); zero elsewhere.
Configuration bernoulli_field(const GraphTopology& g, double rho, const VertexSubset* within,
                              RngKey key);

// ---------------------------------------------------------------------------
// Constrained processes
// ---------------------------------------------------------------------------

// Tree process where transmissions are allowed only within a ray (the
// descending first-child chains that partition the vertex set).  Started
// from all-ones it is, ray by ray, the half-line dynamics from all-ones, and
// it never exceeds the unconstrained process driven by the same timeline.
// The returned trajectory is masked to the ray-head set: off-head vertices
// are frozen at 0.
Trajectory ray_constrained_process(const EventTimeline& tl);

// The timeline with cross-ray transmissions removed (the driving noise of
// ray_constrained_process, unmasked).
EventTimeline ray_filtered_timeline(const EventTimeline& tl);

// Process where transmissions between different width-k slabs are removed;
// with a single slab covering the graph this is the unrestricted process.
EventTimeline slab_filtered_timeline(const EventTimeline& tl, int k);
Trajectory slab_process(const EventTimeline& tl, int k, const Configuration& initial);

// ---------------------------------------------------------------------------
// Space-time projection
// ---------------------------------------------------------------------------

// Observation grid: a list of sites and the times step * i for i in
// [i_begin, i_end).
struct ProjectionGrid {
  std::vector<VertexId> sites;
  double step = 1.0;
  int i_begin = 0;
  int i_end = 0;

  double time(int i) const { return step * i; }
  int rows() const { return i_end - i_begin; }
};

// Row i - grid.i_begin holds the bits at time grid.time(i), one per site.
std::vector<std::vector<std::uint8_t>> project(const Trajectory& traj, const ProjectionGrid& grid);

// Per-row maximum over a block of site columns.
std::vector<std::uint8_t> row_max(const std::vector<std::vector<std::uint8_t>>& rows,
                                  const std::vector<std::uint32_t>& columns);

void write_projection_csv(std::ostream& os, const ProjectionGrid& grid,
                          const std::vector<std::vector<std::uint8_t>>& rows);

// ---------------------------------------------------------------------------
// Slab survival scan
// ---------------------------------------------------------------------------

struct SlabScanRow {
  int width = 0;
  Estimate survival;     // fraction of replicas alive at the horizon
  ExtinctionTail tail;   // tail fit over the replicas that died
};

// Survival probability of the single-seed process on slabs of increasing
// width (same ambient dimension and length), one row per width.
std::vector<SlabScanRow> slab_survival_scan(int dim, int half_length,
                                            const std::vector<int>& widths, double lambda,
                                            double horizon, std::uint64_t replicas,
                                            std::uint64_t seed, double z, int threads = 1);

}  // namespace cplab
