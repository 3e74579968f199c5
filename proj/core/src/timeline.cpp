#include "cplab/timeline.hpp"

#include <algorithm>
#include <ostream>

#include "cplab/util.hpp"

namespace cplab {

namespace {

// Stream-id tags; each (tag, entity, retry) triple addresses one clock.
constexpr std::uint64_t kTagRecovery = 1;
constexpr std::uint64_t kTagTransmission = 2;
constexpr std::uint64_t kTagThinning = 3;

bool strictly_increasing_times(const std::vector<Event>& evs) {
  for (std::size_t i = 1; i < evs.size(); ++i) {
    if (!(evs[i - 1].time < evs[i].time)) return false;
  }
  return true;
}

}  // namespace

EventTimeline EventTimeline::generate(const GraphTopology& g, double lambda, TimeWindow window,
                                      RngKey key) {
  require(lambda >= 0.0, "timeline: negative transmission rate");
  require(window.t1 >= window.t0, "timeline: window ends before it starts");
  require(std::isfinite(window.t0) && std::isfinite(window.t1), "timeline: non-finite window");

  EventTimeline tl;
  tl.topo_ = &g;
  tl.lambda_ = lambda;
  tl.window_ = window;
  tl.key_ = key;

  const VertexId n = g.vertex_count();
  const std::uint32_t arrows = g.arrow_count();
  std::vector<double> times;

  for (std::uint32_t retry = 0;; ++retry) {
    require(retry < 64, "timeline: could not draw collision-free event times");
    tl.events_.clear();
    tl.recovery_count_ = 0;

    for (VertexId v = 0; v < n; ++v) {
      times.clear();
      RngStream rng(key.child({kTagRecovery, v, retry}));
      append_poisson_times(times, 1.0, window.t0, window.t1, rng);
      for (double t : times) tl.events_.push_back({t, v, kNoVertex});
    }
    tl.recovery_count_ = tl.events_.size();

    if (lambda > 0.0) {
      for (std::uint32_t a = 0; a < arrows; ++a) {
        times.clear();
        RngStream rng(key.child({kTagTransmission, a, retry}));
        append_poisson_times(times, lambda, window.t0, window.t1, rng);
        const VertexId from = g.arrow_from(a);
        const VertexId to = g.arrow_to(a);
        for (double t : times) tl.events_.push_back({t, from, to});
      }
    }

    std::sort(tl.events_.begin(), tl.events_.end(), [](const Event& x, const Event& y) {
      if (x.time != y.time) return x.time < y.time;
      if (x.from != y.from) return x.from < y.from;
      return x.to < y.to;
    });
    if (strictly_increasing_times(tl.events_)) {
      tl.retries_ = retry;
      break;
    }
  }
  return tl;
}

EventTimeline EventTimeline::from_events(const GraphTopology& g, double lambda, TimeWindow window,
                                         RngKey key, std::vector<Event> events) {
  EventTimeline tl;
  tl.topo_ = &g;
  tl.lambda_ = lambda;
  tl.window_ = window;
  tl.key_ = key;
  tl.events_ = std::move(events);
  double prev = window.t0;
  for (const Event& e : tl.events_) {
    require(e.time > prev && e.time <= window.t1, "from_events: times must be strictly increasing inside the window");
    prev = e.time;
    require(e.from < g.vertex_count(), "from_events: unknown vertex");
    if (e.is_recovery()) {
      ++tl.recovery_count_;
    } else {
      bool adjacent = false;
      for (VertexId y : g.neighbors(e.from)) adjacent |= (y == e.to);
      require(adjacent, "from_events: transmission along a non-edge");
    }
  }
  return tl;
}

std::pair<std::size_t, std::size_t> EventTimeline::range(double a, double b) const {
  auto cmp = [](const Event& e, double t) { return e.time <= t; };
  auto lo = std::partition_point(events_.begin(), events_.end(),
                                 [&](const Event& e) { return cmp(e, a); });
  auto hi = std::partition_point(lo, events_.end(), [&](const Event& e) { return cmp(e, b); });
  return {static_cast<std::size_t>(lo - events_.begin()),
          static_cast<std::size_t>(hi - events_.begin())};
}

std::vector<double> EventTimeline::recoveries_at(VertexId v) const {
  std::vector<double> out;
  for (const Event& e : events_) {
    if (e.is_recovery() && e.from == v) out.push_back(e.time);
  }
  return out;
}

std::vector<double> EventTimeline::transmissions_on(VertexId from, VertexId to) const {
  std::vector<double> out;
  for (const Event& e : events_) {
    if (!e.is_recovery() && e.from == from && e.to == to) out.push_back(e.time);
  }
  return out;
}

EventTimeline EventTimeline::clone_empty() const {
  EventTimeline out;
  out.topo_ = topo_;
  out.lambda_ = lambda_;
  out.window_ = window_;
  out.key_ = key_;
  out.retries_ = retries_;
  return out;
}

EventTimeline EventTimeline::thin_transmissions(double keep_prob, std::uint64_t salt) const {
  require(keep_prob >= 0.0 && keep_prob <= 1.0, "thin_transmissions: probability outside [0,1]");
  EventTimeline out = clone_empty();
  RngStream rng(key_.child({kTagThinning, salt}));
  for (const Event& e : events_) {
    if (e.is_recovery()) {
      out.events_.push_back(e);
    } else if (rng.next_bernoulli(keep_prob)) {
      out.events_.push_back(e);
    }
  }
  out.recovery_count_ = recovery_count_;
  return out;
}

EventTimeline EventTimeline::slice(double a, double b) const {
  require(a >= window_.t0 && b <= window_.t1 && a <= b, "slice: sub-window out of range");
  EventTimeline out = clone_empty();
  out.window_ = {a, b};
  auto [lo, hi] = range(a, b);
  out.events_.assign(events_.begin() + lo, events_.begin() + hi);
  out.recovery_count_ = 0;
  for (const Event& e : out.events_) {
    if (e.is_recovery()) ++out.recovery_count_;
  }
  return out;
}

void EventTimeline::export_events(std::ostream& os) const {
  os << "# topology " << hex64(topo_->hash()) << " lambda " << num_str(lambda_) << " window "
     << num_str(window_.t0) << " " << num_str(window_.t1) << " key " << hex64(key_.seed) << " "
     << hex64(key_.stream) << "\n";
  for (const Event& e : events_) {
    if (e.is_recovery()) {
      os << "X " << e.from << " " << num_str(e.time) << "\n";
    } else {
      os << "A " << e.from << " " << e.to << " " << num_str(e.time) << "\n";
    }
  }
}

}  // namespace cplab
