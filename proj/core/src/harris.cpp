#include "cplab/harris.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cplab/util.hpp"

namespace cplab {

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

std::uint32_t Configuration::count_ones() const {
  std::uint32_t c = 0;
  for (std::uint8_t b : bits) c += b;
  return c;
}

Configuration config_zero(VertexId n) { return Configuration{std::vector<std::uint8_t>(n, 0)}; }

Configuration config_ones(VertexId n) { return Configuration{std::vector<std::uint8_t>(n, 1)}; }

Configuration config_single(VertexId n, VertexId x) {
  require(x < n, "config_single: vertex out of range");
  Configuration c = config_zero(n);
  c.bits[x] = 1;
  return c;
}

Configuration config_from(const VertexSubset& s) {
  Configuration c;
  c.bits = s.mask;
  return c;
}

bool config_leq(const Configuration& a, const Configuration& b) {
  require(a.bits.size() == b.bits.size(), "config_leq: size mismatch");
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    if (a.bits[i] > b.bits[i]) return false;
  }
  return true;
}

Configuration config_or(const Configuration& a, const Configuration& b) {
  require(a.bits.size() == b.bits.size(), "config_or: size mismatch");
  Configuration c = a;
  for (std::size_t i = 0; i < b.bits.size(); ++i) c.bits[i] |= b.bits[i];
  return c;
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

Trajectory::Trajectory(TimeWindow window, Configuration initial, std::vector<Flip> flips)
    : window_(window), initial_(std::move(initial)), flips_(std::move(flips)) {
  const VertexId n = static_cast<VertexId>(initial_.bits.size());
  // Group flip times by vertex (counting sort keeps each group time-sorted).
  std::vector<std::uint32_t> counts(n + 1, 0);
  for (const Flip& f : flips_) {
    require(f.vertex < n, "trajectory: flip at unknown vertex");
    ++counts[f.vertex + 1];
  }
  for (VertexId v = 0; v < n; ++v) counts[v + 1] += counts[v];
  site_off_ = counts;
  site_time_.resize(flips_.size());
  {
    std::vector<std::uint32_t> cursor(site_off_.begin(), site_off_.end() - 1);
    double prev = window_.t0;
    for (const Flip& f : flips_) {
      require(f.time >= prev && f.time <= window_.t1, "trajectory: flips must be time-sorted and inside the window");
      site_time_[cursor[f.vertex]++] = f.time;
      prev = f.time;
    }
  }
  final_ = initial_;
  for (const Flip& f : flips_) final_.bits[f.vertex] = f.value;
}

std::uint8_t Trajectory::bit_at(VertexId v, double t) const {
  require(t >= window_.t0 && t <= window_.t1, "bit_at: time outside window");
  const double* lo = site_time_.data() + site_off_[v];
  const double* hi = site_time_.data() + site_off_[v + 1];
  const auto k = std::upper_bound(lo, hi, t) - lo;  // flips with time <= t
  return static_cast<std::uint8_t>(initial_.bits[v] ^ (k & 1));
}

Configuration Trajectory::state_at(double t) const {
  Configuration c = initial_;
  for (VertexId v = 0; v < vertex_count(); ++v) c.bits[v] = bit_at(v, t);
  return c;
}

bool Trajectory::zero_run(VertexId v, double a, double b) const {
  require(a <= b, "zero_run: interval reversed");
  if (bit_at(v, a) != 0) return false;
  const double* lo = site_time_.data() + site_off_[v];
  const double* hi = site_time_.data() + site_off_[v + 1];
  // Any flip strictly inside (a, b) breaks the run (starting at 0, the first
  // such flip turns the vertex on before b).
  const double* first_after_a = std::upper_bound(lo, hi, a);
  return first_after_a == hi || *first_after_a >= b;
}

double Trajectory::absorption_time() const {
  if (initial_.all_zero()) return window_.t0;
  std::uint32_t ones = initial_.count_ones();
  for (const Flip& f : flips_) {
    if (f.value) {
      ++ones;
    } else {
      --ones;
    }
    if (ones == 0) return f.time;
  }
  return std::numeric_limits<double>::infinity();
}

void Trajectory::export_flips(std::ostream& os) const {
  os << "# window " << num_str(window_.t0) << " " << num_str(window_.t1) << " vertices "
     << initial_.bits.size() << "\n";
  for (const Flip& f : flips_) {
    os << "F " << f.vertex << " " << num_str(f.time) << " " << int(f.value) << "\n";
  }
}

// ---------------------------------------------------------------------------
// SitePath
// ---------------------------------------------------------------------------

std::uint8_t SitePath::bit_at(double t) const {
  const auto k = std::upper_bound(flips.begin(), flips.end(), t) - flips.begin();
  return static_cast<std::uint8_t>(initial ^ (k & 1));
}

bool SitePath::zero_run(double a, double b) const {
  if (bit_at(a) != 0) return false;
  const auto it = std::upper_bound(flips.begin(), flips.end(), a);
  return it == flips.end() || *it >= b;
}

SitePath extract_site(const Trajectory& traj, VertexId v) {
  SitePath p;
  p.t0 = traj.window().t0;
  p.t1 = traj.window().t1;
  p.initial = traj.initial().bits[v];
  for (const Flip& f : traj.flips()) {
    if (f.vertex == v) p.flips.push_back(f.time);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Forward evolution
// ---------------------------------------------------------------------------

Trajectory evolve(const EventTimeline& tl, const Configuration& initial) {
  const GraphTopology& g = tl.topology();
  require(initial.bits.size() == g.vertex_count(), "evolve: configuration size mismatch");

  std::vector<std::uint8_t> state = initial.bits;
  std::uint32_t ones = initial.count_ones();
  std::vector<Flip> flips;

  for (const Event& e : tl.events()) {
    if (ones == 0) break;  // absorbing; nothing can switch on
    if (e.is_recovery()) {
      if (state[e.from]) {
        state[e.from] = 0;
        --ones;
        flips.push_back({e.time, e.from, 0});
      }
    } else {
      if (state[e.from] && !state[e.to]) {
        state[e.to] = 1;
        ++ones;
        flips.push_back({e.time, e.to, 1});
      }
    }
  }
  return Trajectory(tl.window(), initial, std::move(flips));
}

namespace {

// Sweep two (or three) trajectories through the union of their flip times,
// applying `check` to the configurations after each instant.
template <class Check>
bool sweep_states(std::span<const Trajectory* const> trajs, Check check) {
  const VertexId n = trajs[0]->vertex_count();
  for (const Trajectory* t : trajs) {
    if (t->vertex_count() != n) return false;
    if (t->window().t0 != trajs[0]->window().t0 || t->window().t1 != trajs[0]->window().t1)
      return false;
  }
  std::vector<std::vector<std::uint8_t>> st;
  st.reserve(trajs.size());
  for (const Trajectory* t : trajs) st.push_back(t->initial().bits);
  if (!check(st)) return false;

  std::vector<std::size_t> pos(trajs.size(), 0);
  for (;;) {
    double next = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      auto fl = trajs[i]->flips();
      if (pos[i] < fl.size()) next = std::min(next, fl[pos[i]].time);
    }
    if (!std::isfinite(next)) return true;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      auto fl = trajs[i]->flips();
      while (pos[i] < fl.size() && fl[pos[i]].time == next) {
        st[i][fl[pos[i]].vertex] = fl[pos[i]].value;
        ++pos[i];
      }
    }
    if (!check(st)) return false;
  }
}

}  // namespace

bool pathwise_leq(const Trajectory& a, const Trajectory& b) {
  const Trajectory* ts[] = {&a, &b};
  return sweep_states(ts, [](const std::vector<std::vector<std::uint8_t>>& st) {
    for (std::size_t v = 0; v < st[0].size(); ++v) {
      if (st[0][v] > st[1][v]) return false;
    }
    return true;
  });
}

bool pathwise_equal(const Trajectory& a, const Trajectory& b) {
  return pathwise_leq(a, b) && pathwise_leq(b, a);
}

bool pathwise_is_max(const Trajectory& c, const Trajectory& a, const Trajectory& b) {
  const Trajectory* ts[] = {&c, &a, &b};
  return sweep_states(ts, [](const std::vector<std::vector<std::uint8_t>>& st) {
    for (std::size_t v = 0; v < st[0].size(); ++v) {
      if (st[0][v] != (st[1][v] | st[2][v])) return false;
    }
    return true;
  });
}

// ---------------------------------------------------------------------------
// Backward trace
// ---------------------------------------------------------------------------

bool BackwardTrace::hits(const Configuration& c) const {
  if (died) return false;
  for (std::size_t v = 0; v < set.size(); ++v) {
    if (set[v] && c.bits[v]) return true;
  }
  return false;
}

BackwardTrace backward_trace(const EventTimeline& tl, VertexId y, double t, double s) {
  const GraphTopology& g = tl.topology();
  require(y < g.vertex_count(), "backward_trace: vertex out of range");
  require(s <= t, "backward_trace: target level above the probe");
  require(tl.window().contains(t) && tl.window().contains(s), "backward_trace: outside window");

  BackwardTrace tr;
  tr.set.assign(g.vertex_count(), 0);
  tr.set[y] = 1;
  std::uint32_t active = 1;

  // Events in (s, t], scanned from the top down.  A recovery at an active
  // vertex severs it; a transmission from z to an active vertex adds z.
  auto [lo, hi] = tl.range(s, t);
  auto events = tl.events();
  for (std::size_t i = hi; i-- > lo;) {
    const Event& e = events[i];
    if (e.is_recovery()) {
      if (tr.set[e.from]) {
        tr.set[e.from] = 0;
        if (--active == 0) {
          tr.died = true;
          tr.death_time = e.time;
          return tr;
        }
      }
    } else {
      if (tr.set[e.to] && !tr.set[e.from]) {
        tr.set[e.from] = 1;
        ++active;
      }
    }
  }
  return tr;
}

VertexSubset backward_reachable(const EventTimeline& tl, VertexId y, double t, double s) {
  BackwardTrace tr = backward_trace(tl, y, t, s);
  VertexSubset out;
  out.topology_hash = tl.topology().hash();
  out.provenance = "backward-reachable y=" + std::to_string(y) + " t=" + num_str(t) +
                   " s=" + num_str(s) + (tr.died ? " (died)" : "");
  out.mask = std::move(tr.set);
  if (tr.died) std::fill(out.mask.begin(), out.mask.end(), 0);
  return out;
}

// ---------------------------------------------------------------------------
// Sampling helpers
// ---------------------------------------------------------------------------

StationarySample sample_stationary(const GraphTopology& g, double lambda, double t_back,
                                   RngKey key) {
  require(t_back > 0.0, "sample_stationary: needs a positive burn-in");
  EventTimeline tl = EventTimeline::generate(g, lambda, {-t_back, 0.0}, key);
  Trajectory traj = evolve(tl, config_ones(g.vertex_count()));
  StationarySample s;
  s.at_end = traj.final_state();
  s.at_mid = traj.state_at(-t_back / 2.0);
  return s;
}

ExtinctionSample extinction_time(const GraphTopology& g, VertexId x, double lambda, double horizon,
                                 RngKey key, double chunk) {
  require(horizon > 0.0 && chunk > 0.0, "extinction_time: horizon and chunk must be positive");
  constexpr std::uint64_t kTagChunk = 7;

  Configuration state = config_single(g.vertex_count(), x);
  ExtinctionSample out;
  out.horizon = horizon;

  double t0 = 0.0;
  for (std::uint64_t c = 0; t0 < horizon; ++c) {
    const double t1 = std::min(t0 + chunk, horizon);
    EventTimeline tl = EventTimeline::generate(g, lambda, {t0, t1}, key.child({kTagChunk, c}));
    Trajectory traj = evolve(tl, state);
    const double tau = traj.absorption_time();
    if (std::isfinite(tau)) {
      out.tau = tau;
      return out;
    }
    state = traj.final_state();
    t0 = t1;
  }
  out.tau = horizon;
  out.censored = true;
  return out;
}

Estimate zero_run_probability(std::span<const Trajectory> reps, VertexId x, double a, double b,
                              double z) {
  std::uint64_t hits = 0;
  for (const Trajectory& t : reps) {
    if (t.zero_run(x, a, b)) ++hits;
  }
  return wilson_estimate(hits, reps.size(), z);
}

}  // namespace cplab
