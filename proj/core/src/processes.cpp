#include "cplab/processes.hpp"

#include <algorithm>
#include <ostream>

#include "cplab/parallel.hpp"
#include "cplab/util.hpp"

namespace cplab {

namespace {

constexpr std::uint64_t kTagSpinUp = 4;
constexpr std::uint64_t kTagSpinDown = 5;
constexpr std::uint64_t kTagField = 6;
constexpr std::uint64_t kTagScanReplica = 8;

}  // namespace

// ---------------------------------------------------------------------------
// Independent spin-flips
// ---------------------------------------------------------------------------

Trajectory spin_flip_evolve(const GraphTopology& g, SpinFlipParams params,
                            const Configuration& initial, TimeWindow window, RngKey key) {
  require(params.up >= 0.0, "spin_flip_evolve: negative up-rate");
  require(initial.bits.size() == g.vertex_count(), "spin_flip_evolve: configuration mismatch");
  require(window.t1 >= window.t0, "spin_flip_evolve: window ends before it starts");

  struct Tick {
    double time;
    VertexId vertex;
    std::uint8_t value;
  };
  std::vector<Tick> ticks;
  std::vector<double> times;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    times.clear();
    RngStream up(key.child({kTagSpinUp, v}));
    append_poisson_times(times, params.up, window.t0, window.t1, up);
    for (double t : times) ticks.push_back({t, v, 1});
    times.clear();
    RngStream down(key.child({kTagSpinDown, v}));
    append_poisson_times(times, 1.0, window.t0, window.t1, down);
    for (double t : times) ticks.push_back({t, v, 0});
  }
  std::sort(ticks.begin(), ticks.end(), [](const Tick& a, const Tick& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.vertex != b.vertex) return a.vertex < b.vertex;
    return a.value < b.value;
  });

  std::vector<std::uint8_t> state = initial.bits;
  std::vector<Flip> flips;
  for (const Tick& k : ticks) {
    if (state[k.vertex] != k.value) {
      state[k.vertex] = k.value;
      flips.push_back({k.time, k.vertex, k.value});
    }
  }
  return Trajectory(window, initial, std::move(flips));
}

// ---------------------------------------------------------------------------
// Initial fields
// ---------------------------------------------------------------------------

Configuration bernoulli_field(const GraphTopology& g, double rho, const VertexSubset* within,
                              RngKey key) {
  require(rho >= 0.0 && rho <= 1.0, "bernoulli_field: density outside [0,1]");
  if (within != nullptr) {
    require(within->topology_hash == g.hash(), "bernoulli_field: subset from another graph");
  }
  Configuration c = config_zero(g.vertex_count());
  RngStream rng(key.child({kTagField}));
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const bool draw = rng.next_bernoulli(rho);  // one draw per vertex, mask or not
    if (within == nullptr || within->contains(v)) c.bits[v] = draw ? 1 : 0;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Constrained processes
// ---------------------------------------------------------------------------

EventTimeline ray_filtered_timeline(const EventTimeline& tl) {
  const GraphTopology& g = tl.topology();
  require(g.kind() == GraphKind::tree, "ray_filtered_timeline: needs a tree");
  const std::vector<VertexId> heads = ray_heads(g);
  return tl.filter_transmissions(
      [&heads](VertexId from, VertexId to) { return heads[from] == heads[to]; });
}

Trajectory ray_constrained_process(const EventTimeline& tl) {
  const GraphTopology& g = tl.topology();
  const EventTimeline filtered = ray_filtered_timeline(tl);
  Trajectory full = evolve(filtered, config_ones(g.vertex_count()));

  // Mask to the ray heads: the constrained process is observed at the head
  // of each ray; everything else reads 0.
  const VertexSubset heads = tree_delta(g);
  Configuration init = config_from(heads);
  std::vector<Flip> flips;
  for (const Flip& f : full.flips()) {
    if (heads.contains(f.vertex)) flips.push_back(f);
  }
  return Trajectory(full.window(), std::move(init), std::move(flips));
}

EventTimeline slab_filtered_timeline(const EventTimeline& tl, int k) {
  const GraphTopology& g = tl.topology();
  require(k >= 1, "slab_filtered_timeline: width must be >= 1");
  return tl.filter_transmissions([&g, k](VertexId from, VertexId to) {
    return slab_cell(g, from, k) == slab_cell(g, to, k);
  });
}

Trajectory slab_process(const EventTimeline& tl, int k, const Configuration& initial) {
  return evolve(slab_filtered_timeline(tl, k), initial);
}

// ---------------------------------------------------------------------------
// Space-time projection
// ---------------------------------------------------------------------------

std::vector<std::vector<std::uint8_t>> project(const Trajectory& traj,
                                               const ProjectionGrid& grid) {
  require(grid.i_end >= grid.i_begin, "project: empty grid orientation");
  require(grid.step > 0.0, "project: step must be positive");
  for (VertexId v : grid.sites) {
    require(v < traj.vertex_count(), "project: site outside the graph");
  }
  require(grid.rows() == 0 || (traj.window().contains(grid.time(grid.i_begin)) &&
                               traj.window().contains(grid.time(grid.i_end - 1))),
          "project: grid times outside the trajectory window");

  std::vector<std::vector<std::uint8_t>> rows;
  rows.reserve(static_cast<std::size_t>(grid.rows()));
  for (int i = grid.i_begin; i < grid.i_end; ++i) {
    std::vector<std::uint8_t> row(grid.sites.size());
    for (std::size_t j = 0; j < grid.sites.size(); ++j) {
      row[j] = traj.bit_at(grid.sites[j], grid.time(i));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::uint8_t> row_max(const std::vector<std::vector<std::uint8_t>>& rows,
                                  const std::vector<std::uint32_t>& columns) {
  std::vector<std::uint8_t> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    std::uint8_t m = 0;
    for (std::uint32_t c : columns) {
      require(c < row.size(), "row_max: column out of range");
      m |= row[c];
    }
    out.push_back(m);
  }
  return out;
}

void write_projection_csv(std::ostream& os, const ProjectionGrid& grid,
                          const std::vector<std::vector<std::uint8_t>>& rows) {
  os << "time_index,time";
  for (VertexId v : grid.sites) os << ",v" << v;
  os << "\n";
  for (int i = grid.i_begin; i < grid.i_end; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i - grid.i_begin)];
    os << i << "," << num_str(grid.time(i));
    for (std::uint8_t b : row) os << "," << int(b);
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// Slab survival scan
// ---------------------------------------------------------------------------

std::vector<SlabScanRow> slab_survival_scan(int dim, int half_length,
                                            const std::vector<int>& widths, double lambda,
                                            double horizon, std::uint64_t replicas,
                                            std::uint64_t seed, double z, int threads) {
  std::vector<SlabScanRow> out;
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    const int k = widths[wi];
    const GraphTopology g =
        GraphTopology::build(SlabExtent{dim, k, half_length}, BoundaryPolicy::free);
    std::vector<ExtinctionSample> samples(replicas);
    parallel_replicas(replicas, threads, [&](std::uint64_t r) {
      const RngKey key = replica_key(seed, r).child({kTagScanReplica, wi});
      samples[r] = extinction_time(g, g.origin(), lambda, horizon, key);
    });
    SlabScanRow row;
    row.width = k;
    row.tail = extinction_tail(samples, 2.0, 10, z);
    row.survival = row.tail.survival;
    out.push_back(row);
  }
  return out;
}

}  // namespace cplab
