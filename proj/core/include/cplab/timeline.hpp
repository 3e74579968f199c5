// Space-time driving noise for the interacting-particle simulations: each
// vertex carries a rate-1 recovery clock and each directed edge a rate-lambda
// transmission clock, realized as Poisson event times on a bounded window.
// A timeline is a pure function of (topology, lambda, window, rng key), so
// two processes built from the same timeline are coupled pathwise.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cplab/rng.hpp"
#include "cplab/topology.hpp"

namespace cplab {

struct TimeWindow {
  double t0 = 0.0;
  double t1 = 0.0;
  double length() const { return t1 - t0; }
  bool contains(double t) const { return t >= t0 && t <= t1; }
};

// One clock ring.  `to == kNoVertex` marks a recovery event at vertex `from`;
// otherwise the event is a transmission attempt along the directed edge
// from -> to.
struct Event {
  double time = 0.0;
  VertexId from = 0;
  VertexId to = kNoVertex;
  bool is_recovery() const { return to == kNoVertex; }
};

class EventTimeline {
 public:
  // Draws all clocks on (window.t0, window.t1].  Event times across the whole
  // window are pairwise distinct: in the (measure-zero, but floating-point-
  // possible) case of a collision the entire window is redrawn from a fresh
  // stream, and the number of redraws is recorded.
  static EventTimeline generate(const GraphTopology& g, double lambda, TimeWindow window,
                                RngKey key);

  // Timeline with a caller-supplied event sequence (validated: sorted,
  // strictly distinct times, endpoints adjacent in g, inside the window).
  // For handcrafted scenarios and event remappings between coupled graphs.
  static EventTimeline from_events(const GraphTopology& g, double lambda, TimeWindow window,
                                   RngKey key, std::vector<Event> events);

  const GraphTopology& topology() const { return *topo_; }
  double lambda() const { return lambda_; }
  TimeWindow window() const { return window_; }
  RngKey key() const { return key_; }
  std::uint32_t retries() const { return retries_; }

  // All events, sorted by increasing time.
  std::span<const Event> events() const { return events_; }
  std::size_t recovery_count() const { return recovery_count_; }
  std::size_t transmission_count() const { return events_.size() - recovery_count_; }

  // Indices into events() of the first event with time > a and the first
  // with time > b, i.e. the half-open slice of events in (a, b].
  std::pair<std::size_t, std::size_t> range(double a, double b) const;

  // Recovery times at one vertex / transmission times on one directed edge,
  // in increasing order.  Linear scans, intended for tests and exports.
  std::vector<double> recoveries_at(VertexId v) const;
  std::vector<double> transmissions_on(VertexId from, VertexId to) const;

  // Copy with only the transmission events accepted by `keep`; recovery
  // events and all metadata are preserved, so the result is the same noise
  // realization with some edges silenced.
  template <class Pred>
  EventTimeline filter_transmissions(Pred keep) const {
    EventTimeline out = clone_empty();
    for (const Event& e : events_) {
      if (e.is_recovery() || keep(e.from, e.to)) out.events_.push_back(e);
    }
    out.recovery_count_ = recovery_count_;
    return out;
  }

  // Copy keeping each transmission event independently with probability
  // keep_prob (recoveries untouched).  Deterministic in (key, salt).
  EventTimeline thin_transmissions(double keep_prob, std::uint64_t salt) const;

  // Restriction to the sub-window [a, b] (events in (a, b]).
  EventTimeline slice(double a, double b) const;

  // Text export, one event per line, preceded by a header that pins down the
  // generating inputs.
  void export_events(std::ostream& os) const;

 private:
  EventTimeline clone_empty() const;

  const GraphTopology* topo_ = nullptr;
  double lambda_ = 0.0;
  TimeWindow window_;
  RngKey key_{};
  std::uint32_t retries_ = 0;
  std::size_t recovery_count_ = 0;
  std::vector<Event> events_;
};

}  // namespace cplab
