// Forward evolution driven by an event timeline, trajectory queries, and
// backward tracing.
//
// Dynamics on {0,1}^V: a recovery event at x sets x to 0; a transmission
// event from y to x sets x to 1 when y is currently 1.  Trajectories are
// right-continuous: the state at time t includes the effect of every event
// with time <= t.
//
// The backward trace inverts the picture: starting from a probe (y, t) it
// walks down the same timeline collecting every vertex from which the probe
// could have been reached, so occupancy questions about the forward process
// can be answered as hitting questions about the trace.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cplab/stats.hpp"
#include "cplab/timeline.hpp"
#include "cplab/topology.hpp"

namespace cplab {

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

struct Configuration {
  std::vector<std::uint8_t> bits;

  std::uint32_t count_ones() const;
  bool all_zero() const { return count_ones() == 0; }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

Configuration config_zero(VertexId n);
Configuration config_ones(VertexId n);
Configuration config_single(VertexId n, VertexId x);
Configuration config_from(const VertexSubset& s);

// True when a(x) <= b(x) for every x.
bool config_leq(const Configuration& a, const Configuration& b);
Configuration config_or(const Configuration& a, const Configuration& b);

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct Flip {
  double time = 0.0;
  VertexId vertex = 0;
  std::uint8_t value = 0;  // state of `vertex` from `time` on
};

class Trajectory {
 public:
  Trajectory(TimeWindow window, Configuration initial, std::vector<Flip> flips);

  TimeWindow window() const { return window_; }
  const Configuration& initial() const { return initial_; }
  const Configuration& final_state() const { return final_; }
  std::span<const Flip> flips() const { return flips_; }
  VertexId vertex_count() const { return static_cast<VertexId>(initial_.bits.size()); }

  // State of one vertex / the whole configuration at time t (right-
  // continuous; window().t0 <= t <= window().t1).
  std::uint8_t bit_at(VertexId v, double t) const;
  Configuration state_at(double t) const;

  // True when vertex v is 0 throughout [a, b): 0 at a and no flip in (a, b).
  bool zero_run(VertexId v, double a, double b) const;

  // First time the configuration is all zeros, or +infinity if it never is.
  // Once all-zero the dynamics cannot leave it, so this is an absorption time.
  double absorption_time() const;

  // One "F vertex time value" line per flip, preceded by the window.
  void export_flips(std::ostream& os) const;

 private:
  friend class SiteView;
  TimeWindow window_;
  Configuration initial_;
  Configuration final_;
  std::vector<Flip> flips_;               // time-ascending
  std::vector<std::uint32_t> site_off_;   // per-vertex CSR into site_time_
  std::vector<double> site_time_;         // flip times grouped by vertex
};

// Per-vertex extract of a trajectory: cheap to copy, keeps only what zero-run
// and occupancy statistics need.
struct SitePath {
  double t0 = 0.0, t1 = 0.0;
  std::uint8_t initial = 0;
  std::vector<double> flips;  // strictly increasing; parity gives the state

  std::uint8_t bit_at(double t) const;
  bool zero_run(double a, double b) const;
};

SitePath extract_site(const Trajectory& traj, VertexId v);

// ---------------------------------------------------------------------------
// Forward evolution
// ---------------------------------------------------------------------------

// Run the dynamics over the timeline's full window from `initial`.  The
// all-zero configuration is absorbing and evolution stops early upon hitting
// it (no further events can change anything).
Trajectory evolve(const EventTimeline& tl, const Configuration& initial);

// a(x) <= b(x) for all x at all times of the common window.
bool pathwise_leq(const Trajectory& a, const Trajectory& b);
bool pathwise_equal(const Trajectory& a, const Trajectory& b);
// c == max(a, b) pointwise at all times (checked at every flip instant).
bool pathwise_is_max(const Trajectory& c, const Trajectory& a, const Trajectory& b);

// ---------------------------------------------------------------------------
// Backward trace
// ---------------------------------------------------------------------------

struct BackwardTrace {
  std::vector<std::uint8_t> set;  // vertices reaching the probe, at level `s`
  bool died = false;              // the active set emptied before reaching s
  double death_time = 0.0;        // event time at which it emptied (if died)

  bool hits(const Configuration& c) const;
};

// Trace the probe (y, t) down to level s (s <= t, both within the window).
// The active set starts as {y}; scanning events downward, a recovery at an
// active vertex removes it, and a transmission y->x with x active inserts y.
// Emptiness is absorbing, so `died` means the probe's value at time t is 0
// regardless of the state at level s.
BackwardTrace backward_trace(const EventTimeline& tl, VertexId y, double t, double s);

VertexSubset backward_reachable(const EventTimeline& tl, VertexId y, double t, double s);

// ---------------------------------------------------------------------------
// Sampling helpers
// ---------------------------------------------------------------------------

// Configuration drawn by running the dynamics from all-ones over the window
// [-t_back, 0] and reading time 0; the mid-window configuration is kept as a
// relaxation diagnostic.
struct StationarySample {
  Configuration at_end;
  Configuration at_mid;
};
StationarySample sample_stationary(const GraphTopology& g, double lambda, double t_back,
                                   RngKey key);

// Absorption time of the dynamics started from a single occupied vertex,
// right-censored at `horizon`.  The timeline is generated in chunks of
// `chunk` time units so short-lived runs never pay for the full horizon;
// chunking does not change the law or the realized path.
struct ExtinctionSample {
  double tau = 0.0;
  bool censored = false;
  double horizon = 0.0;
};
ExtinctionSample extinction_time(const GraphTopology& g, VertexId x, double lambda, double horizon,
                                 RngKey key, double chunk = 10.0);

// P(vertex x is 0 throughout [a, b)) over replicated trajectories.
Estimate zero_run_probability(std::span<const Trajectory> reps, VertexId x, double a, double b,
                              double z);

}  // namespace cplab
