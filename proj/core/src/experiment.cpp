#include "cplab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cplab/analysis.hpp"
#include "cplab/ctmc.hpp"
#include "cplab/harris.hpp"
#include "cplab/parallel.hpp"
#include "cplab/processes.hpp"
#include "cplab/util.hpp"

namespace cplab {

namespace {

constexpr const char* kCodeVersion = "0.1.0";

// Stream-id tags for experiment-level derivations (timeline internals use
// their own tag space on child keys, so these never collide).
constexpr std::uint64_t kTagMainPhase = 16;
constexpr std::uint64_t kTagGate = 17;
constexpr std::uint64_t kTagBurnTwice = 18;
constexpr std::uint64_t kTagCoupling = 19;
constexpr std::uint64_t kTagFieldDraw = 20;
constexpr std::uint64_t kTagProbeDraw = 21;
constexpr std::uint64_t kTagHalfline = 22;
constexpr std::uint64_t kTagExtinction = 23;

}  // namespace

// ---------------------------------------------------------------------------
// TopologySpec
// ---------------------------------------------------------------------------

TopologyExtent TopologySpec::extent() const {
  if (kind == "lattice") return LatticeExtent{dim, radius};
  if (kind == "tree") return TreeExtent{branching, depth};
  if (kind == "half-line") return HalfLineExtent{length};
  if (kind == "slab") return SlabExtent{dim, width, half_length};
  if (kind == "explicit") return ExplicitExtent{vertices, edges};
  fail("unknown topology kind: " + kind);
}

BoundaryPolicy TopologySpec::boundary_policy() const {
  if (boundary == "free") return BoundaryPolicy::free;
  if (boundary == "periodic") return BoundaryPolicy::periodic;
  fail("unknown boundary policy: " + boundary);
}

GraphTopology TopologySpec::build() const {
  return GraphTopology::build(extent(), boundary_policy());
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json topology_to_json(const TopologySpec& t) {
  nlohmann::json j;
  j["kind"] = t.kind;
  j["boundary"] = t.boundary;
  j["dim"] = t.dim;
  j["radius"] = t.radius;
  j["branching"] = t.branching;
  j["depth"] = t.depth;
  j["length"] = t.length;
  j["width"] = t.width;
  j["half_length"] = t.half_length;
  j["vertices"] = t.vertices;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : t.edges) edges.push_back({a, b});
  j["edges"] = edges;
  return j;
}

TopologySpec topology_from_json(const nlohmann::json& j) {
  TopologySpec t;
  for (const auto& [key, val] : j.items()) {
    if (key == "kind") {
      t.kind = val.get<std::string>();
    } else if (key == "boundary") {
      t.boundary = val.get<std::string>();
    } else if (key == "dim") {
      t.dim = val.get<int>();
    } else if (key == "radius") {
      t.radius = val.get<int>();
    } else if (key == "branching") {
      t.branching = val.get<int>();
    } else if (key == "depth") {
      t.depth = val.get<int>();
    } else if (key == "length") {
      t.length = val.get<int>();
    } else if (key == "width") {
      t.width = val.get<int>();
    } else if (key == "half_length") {
      t.half_length = val.get<int>();
    } else if (key == "vertices") {
      t.vertices = val.get<std::uint32_t>();
    } else if (key == "edges") {
      for (const auto& e : val) {
        t.edges.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
      }
    } else {
      fail("config: unknown topology key '" + key + "'");
    }
  }
  return t;
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["label"] = label;
  j["topology"] = topology_to_json(topology);
  j["lambda"] = lambda;
  j["replicas"] = replicas;
  j["seed"] = seed;
  j["threads"] = threads;
  j["out_dir"] = out_dir;
  j["t_back"] = t_back;
  j["step"] = step;
  j["n_max"] = n_max;
  j["pad"] = pad;
  j["horizon"] = horizon;
  j["chunk"] = chunk;
  j["s0"] = s0;
  j["theta"] = theta;
  j["conf_z"] = conf_z;
  j["probe_time"] = probe_time;
  j["init"] = init;
  j["delta_mode"] = delta_mode;
  j["delta_sites"] = delta_sites;
  j["delta_m"] = delta_m;
  j["cond_past"] = cond_past;
  j["min_hits"] = min_hits;
  j["t_grid"] = t_grid;
  j["u_grid"] = u_grid;
  j["s_max"] = s_max;
  j["fit_lo"] = fit_lo;
  j["fit_hi"] = fit_hi;
  j["n_grid"] = n_grid;
  j["T_grid"] = T_grid;
  j["widths"] = widths;
  j["span"] = span;
  j["time_points"] = time_points;
  j["probes"] = probes;
  j["up_rate"] = up_rate;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  for (const auto& [key, val] : j.items()) {
    if (key == "kind") {
      c.kind = val.get<std::string>();
    } else if (key == "label") {
      c.label = val.get<std::string>();
    } else if (key == "topology") {
      c.topology = topology_from_json(val);
    } else if (key == "lambda") {
      c.lambda = val.get<double>();
    } else if (key == "replicas") {
      c.replicas = val.get<std::uint64_t>();
    } else if (key == "seed") {
      c.seed = val.get<std::uint64_t>();
    } else if (key == "threads") {
      c.threads = val.get<int>();
    } else if (key == "out_dir") {
      c.out_dir = val.get<std::string>();
    } else if (key == "t_back") {
      c.t_back = val.get<double>();
    } else if (key == "step") {
      c.step = val.get<double>();
    } else if (key == "n_max") {
      c.n_max = val.get<int>();
    } else if (key == "pad") {
      c.pad = val.get<int>();
    } else if (key == "horizon") {
      c.horizon = val.get<double>();
    } else if (key == "chunk") {
      c.chunk = val.get<double>();
    } else if (key == "s0") {
      c.s0 = val.get<double>();
    } else if (key == "theta") {
      c.theta = val.get<double>();
    } else if (key == "conf_z") {
      c.conf_z = val.get<double>();
    } else if (key == "probe_time") {
      c.probe_time = val.get<double>();
    } else if (key == "init") {
      c.init = val.get<std::string>();
    } else if (key == "delta_mode") {
      c.delta_mode = val.get<std::string>();
    } else if (key == "delta_sites") {
      c.delta_sites = val.get<std::vector<int>>();
    } else if (key == "delta_m") {
      c.delta_m = val.get<int>();
    } else if (key == "cond_past") {
      c.cond_past = val.get<int>();
    } else if (key == "min_hits") {
      c.min_hits = val.get<std::uint64_t>();
    } else if (key == "t_grid") {
      c.t_grid = val.get<std::vector<double>>();
    } else if (key == "u_grid") {
      c.u_grid = val.get<std::vector<double>>();
    } else if (key == "s_max") {
      c.s_max = val.get<double>();
    } else if (key == "fit_lo") {
      c.fit_lo = val.get<double>();
    } else if (key == "fit_hi") {
      c.fit_hi = val.get<double>();
    } else if (key == "n_grid") {
      c.n_grid = val.get<std::vector<int>>();
    } else if (key == "T_grid") {
      c.T_grid = val.get<std::vector<double>>();
    } else if (key == "widths") {
      c.widths = val.get<std::vector<int>>();
    } else if (key == "span") {
      c.span = val.get<int>();
    } else if (key == "time_points") {
      c.time_points = val.get<int>();
    } else if (key == "probes") {
      c.probes = val.get<std::uint64_t>();
    } else if (key == "up_rate") {
      c.up_rate = val.get<double>();
    } else {
      fail("config: unknown key '" + key + "'");
    }
  }
  return c;
}

nlohmann::json ExperimentConfig::canonical_json() const {
  nlohmann::json j = to_json();
  j.erase("out_dir");
  j.erase("threads");
  return j;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_json().dump()); }

// ---------------------------------------------------------------------------
// Shared driver helpers
// ---------------------------------------------------------------------------

namespace {

int auto_pad(const ExperimentConfig& cfg, double time_span) {
  if (cfg.pad >= 0) return cfg.pad;
  const double reach = 0.7 * cfg.lambda * time_span;
  return std::max(10, static_cast<int>(std::ceil(reach)));
}

// Simulation graph enlarged so truncation cannot reach the observed region
// within the run's time span.  Trees are never padded (their observation is
// structural); explicit graphs are taken as-is.
GraphTopology padded_graph(const ExperimentConfig& cfg, double time_span, int* pad_out) {
  TopologySpec t = cfg.topology;
  int pad = 0;
  if (t.kind == "lattice") {
    pad = auto_pad(cfg, time_span);
    t.radius += pad;
  } else if (t.kind == "half-line") {
    pad = auto_pad(cfg, time_span);
    t.length += pad;
  } else if (t.kind == "slab") {
    pad = auto_pad(cfg, time_span);
    t.half_length += pad;
  }
  if (pad_out != nullptr) *pad_out = pad;
  return t.build();
}

VertexId site_at_coord(const GraphTopology& g, std::vector<std::int32_t> c) {
  const VertexId v = g.vertex_at(c);
  require(v < g.vertex_count(), "observed site falls outside the simulation graph");
  return v;
}

// Lattice site on the long axis (last coordinate = x, others 0).
VertexId axis_site(const GraphTopology& g, int x) {
  std::vector<std::int32_t> c(static_cast<std::size_t>(g.dim()), 0);
  c.back() = x;
  return site_at_coord(g, c);
}

nlohmann::json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"lo", e.lo}, {"hi", e.hi}, {"hits", e.hits}, {"n", e.n}};
}

nlohmann::json fit_json(const LineFit& f) {
  return {{"slope", f.slope},   {"intercept", f.intercept},       {"r2", f.r2},
          {"slope_stderr", f.slope_stderr}, {"points", f.points}, {"ok", f.ok}};
}

std::string csv_estimate(const Estimate& e) {
  return num_str(e.value) + "," + num_str(e.lo) + "," + num_str(e.hi);
}

// Quick survival check: with the configured rate, does the single-seed
// process on the simulation graph survive to a short horizon with positive
// frequency?  Gates the presets that assume a surviving phase.
nlohmann::json survival_gate(const GraphTopology& g, const ExperimentConfig& cfg, bool* ok) {
  const std::uint64_t n = 200;
  const double horizon = 30.0;
  std::vector<std::uint8_t> alive(n, 0);
  parallel_replicas(n, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({kTagGate});
    alive[r] = extinction_time(g, g.origin(), cfg.lambda, horizon, key, cfg.chunk).censored;
  });
  std::uint64_t hits = 0;
  for (std::uint8_t a : alive) hits += a;
  const Estimate e = wilson_estimate(hits, n, cfg.conf_z);
  *ok = e.lo > 0.0;
  nlohmann::json j;
  j["survival"] = estimate_json(e);
  j["horizon"] = horizon;
  j["passed"] = *ok;
  return j;
}

struct Artifact {
  std::string name;
  std::string bytes;
};

void write_atomic(const std::filesystem::path& dir, const Artifact& a) {
  const std::filesystem::path tmp = dir / (a.name + ".tmp");
  const std::filesystem::path dst = dir / a.name;
  {
    std::ofstream os(tmp, std::ios::binary);
    require(os.good(), "cannot open " + tmp.string());
    os.write(a.bytes.data(), static_cast<std::streamsize>(a.bytes.size()));
    require(os.good(), "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, dst);
}

// Stationary space-time bit rows: per replica, the process from all-ones
// over [-(t_back + lead), n_max * step], read at the grid sites and index
// times lo_idx..hi_idx (inclusive).  row[k] = bit at index lo_idx + k; for
// multi-site grids the bits of all sites at one index are OR-free (caller
// combines), so this helper returns per-(index, site) bits flattened
// site-fastest.
struct StationaryGridJob {
  const GraphTopology* graph = nullptr;
  std::vector<VertexId> sites;
  double step = 1.0;
  int lo_idx = 0;
  int hi_idx = 0;  // inclusive
  double t_back = 20.0;
  double lambda = 2.0;
  std::uint64_t tag = kTagMainPhase;
};

std::vector<BitRow> stationary_grid_rows(const StationaryGridJob& job, const ExperimentConfig& cfg) {
  const double t0 = job.step * job.lo_idx - job.t_back;
  const double t1 = job.step * job.hi_idx;
  const int idx_count = job.hi_idx - job.lo_idx + 1;
  std::vector<BitRow> rows(cfg.replicas);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({job.tag});
    EventTimeline tl = EventTimeline::generate(*job.graph, job.lambda, {t0, t1}, key);
    Trajectory traj = evolve(tl, config_ones(job.graph->vertex_count()));
    BitRow row(static_cast<std::size_t>(idx_count) * job.sites.size());
    for (int i = 0; i < idx_count; ++i) {
      const double t = job.step * (job.lo_idx + i);
      for (std::size_t sj = 0; sj < job.sites.size(); ++sj) {
        row[static_cast<std::size_t>(i) * job.sites.size() + sj] = traj.bit_at(job.sites[sj], t);
      }
    }
    rows[r] = std::move(row);
  });
  return rows;
}

struct DriverResult {
  std::string verdict = "PASS";
  int exit_code = kExitPass;
  nlohmann::json results;
  std::vector<Artifact> artifacts;
  std::vector<std::uint64_t> topology_hashes;

  void settle(bool pass, bool insufficient = false) {
    if (insufficient) {
      verdict = "INSUFFICIENT";
      exit_code = kExitInsufficient;
    } else if (!pass) {
      verdict = "FAIL";
      exit_code = kExitFail;
    }
  }
};

// ---------------------------------------------------------------------------
// Driver: oracle-check
// ---------------------------------------------------------------------------

DriverResult run_oracle_check(const ExperimentConfig& cfg) {
  DriverResult out;
  const GraphTopology g = cfg.topology.build();
  out.topology_hashes.push_back(g.hash());
  require(g.vertex_count() <= kMaxExactVertices, "oracle-check: graph too large for the oracle");
  require(cfg.init == "ones" || cfg.init == "single", "oracle-check: init must be ones|single");
  const Configuration init = cfg.init == "ones" ? config_ones(g.vertex_count())
                                                : config_single(g.vertex_count(), g.origin());

  const ExactDistribution ex = exact_distribution(g, cfg.lambda, init, cfg.probe_time);
  const ExactDistribution ex2 =
      exact_distribution_uniformized(g, cfg.lambda, init, cfg.probe_time);
  double route_gap = 0.0;
  for (std::size_t s = 0; s < ex.p.size(); ++s) {
    route_gap = std::max(route_gap, std::abs(ex.p[s] - ex2.p[s]));
  }
  const bool routes_ok = route_gap <= 1e-8;

  const std::uint32_t states = 1u << g.vertex_count();
  std::vector<std::atomic<std::uint64_t>> counts(states);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({kTagMainPhase});
    EventTimeline tl = EventTimeline::generate(g, cfg.lambda, {0.0, cfg.probe_time}, key);
    Trajectory traj = evolve(tl, init);
    counts[config_index(traj.final_state())].fetch_add(1, std::memory_order_relaxed);
  });

  // Exact two-sided binomial test per configuration at the 4-sigma level.
  const double alarm_level = normal_two_sided_tail(4.0);
  double min_p = 1.0;
  double tvd = 0.0;
  std::uint32_t alarms = 0;
  std::string csv = "config,exact_p,mc_count,mc_freq,binom_p\n";
  for (std::uint32_t s = 0; s < states; ++s) {
    const std::uint64_t k = counts[s].load();
    const double freq = static_cast<double>(k) / static_cast<double>(cfg.replicas);
    const double pv = binomial_two_sided_p(k, cfg.replicas, ex.p[s]);
    min_p = std::min(min_p, pv);
    tvd += std::abs(freq - ex.p[s]);
    if (pv < alarm_level) ++alarms;
    csv += std::to_string(s) + "," + num_str(ex.p[s]) + "," + std::to_string(k) + "," +
           num_str(freq) + "," + num_str(pv) + "\n";
  }
  tvd /= 2.0;

  out.results["route_gap"] = route_gap;
  out.results["routes_agree"] = routes_ok;
  out.results["alarm_level"] = alarm_level;
  out.results["alarms"] = alarms;
  out.results["min_binom_p"] = min_p;
  out.results["total_variation"] = tvd;
  out.results["states"] = states;
  out.artifacts.push_back({"oracle.csv", csv});
  out.settle(routes_ok && alarms == 0);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: upper-sample
// ---------------------------------------------------------------------------

DriverResult run_upper_sample(const ExperimentConfig& cfg) {
  DriverResult out;
  int pad = 0;
  const GraphTopology g = padded_graph(cfg, cfg.t_back, &pad);
  out.topology_hashes.push_back(g.hash());

  // Observed region: the vertices of the unpadded topology, located by coordinates
  // (trees and explicit graphs observe everything).
  std::vector<VertexId> obs;
  if (cfg.topology.kind == "lattice" || cfg.topology.kind == "slab" ||
      cfg.topology.kind == "half-line") {
    const GraphTopology inner = cfg.topology.build();
    obs.reserve(inner.vertex_count());
    if (cfg.topology.kind == "half-line") {
      for (VertexId v = 0; v < inner.vertex_count(); ++v) obs.push_back(v);
    } else {
      std::vector<std::int32_t> c(static_cast<std::size_t>(inner.dim()));
      for (VertexId v = 0; v < inner.vertex_count(); ++v) {
        for (int a = 0; a < inner.dim(); ++a) c[static_cast<std::size_t>(a)] = inner.coord(v, a);
        obs.push_back(site_at_coord(g, c));
      }
    }
  } else {
    for (VertexId v = 0; v < g.vertex_count(); ++v) obs.push_back(v);
  }

  auto density_run = [&](double t_back, std::uint64_t tag, std::uint64_t replicas,
                         std::vector<double>* mid_out, std::uint64_t* origin_hits) {
    std::vector<double> end(replicas), mid(replicas);
    std::vector<std::uint8_t> origin_bit(replicas, 0);
    parallel_replicas(replicas, cfg.threads, [&](std::uint64_t r) {
      const RngKey key = replica_key(cfg.seed, r).child({tag});
      const StationarySample s = sample_stationary(g, cfg.lambda, t_back, key);
      double se = 0.0, sm = 0.0;
      for (VertexId v : obs) {
        se += s.at_end.bits[v];
        sm += s.at_mid.bits[v];
      }
      end[r] = se / static_cast<double>(obs.size());
      mid[r] = sm / static_cast<double>(obs.size());
      origin_bit[r] = s.at_end.bits[g.origin()];
    });
    if (mid_out != nullptr) *mid_out = mid;
    if (origin_hits != nullptr) {
      *origin_hits = 0;
      for (std::uint8_t b : origin_bit) *origin_hits += b;
    }
    return end;
  };

  std::vector<double> mid;
  std::uint64_t origin_hits = 0;
  const std::vector<double> end = density_run(cfg.t_back, kTagMainPhase, cfg.replicas, &mid,
                                              &origin_hits);
  const std::uint64_t replicas2 = std::max<std::uint64_t>(cfg.replicas / 2, 2);
  const std::vector<double> end2 = density_run(2.0 * cfg.t_back, kTagBurnTwice, replicas2,
                                               nullptr, nullptr);

  const Estimate e_end = mean_estimate(end, cfg.conf_z);
  const Estimate e_mid = mean_estimate(mid, cfg.conf_z);
  const Estimate e_end2 = mean_estimate(end2, cfg.conf_z);
  const Estimate occ = wilson_estimate(origin_hits, cfg.replicas, cfg.conf_z);

  const bool mid_ok = estimates_compatible(e_end, e_mid, cfg.conf_z);
  const bool burn_ok = estimates_compatible(e_end, e_end2, cfg.conf_z);

  out.results["pad"] = pad;
  out.results["density_end"] = estimate_json(e_end);
  out.results["density_mid"] = estimate_json(e_mid);
  out.results["density_double_burn"] = estimate_json(e_end2);
  out.results["origin_occupied"] = estimate_json(occ);
  out.results["relaxed_by_midpoint"] = mid_ok;
  out.results["stable_under_double_burn"] = burn_ok;

  std::string csv = "which,value,lo,hi\n";
  csv += "end," + csv_estimate(e_end) + "\n";
  csv += "mid," + csv_estimate(e_mid) + "\n";
  csv += "double_burn," + csv_estimate(e_end2) + "\n";
  csv += "origin_occupied," + csv_estimate(occ) + "\n";
  out.artifacts.push_back({"density.csv", csv});
  out.settle(mid_ok && burn_ok);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: tree-domination
// ---------------------------------------------------------------------------

DriverResult run_tree_domination(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "tree", "tree-domination: topology must be a tree");
  const GraphTopology g = cfg.topology.build();
  out.topology_hashes.push_back(g.hash());

  bool gate_ok = false;
  out.results["gate"] = survival_gate(g, cfg, &gate_ok);

  // Structural facts, once: head-set density profile against the closed
  // form, and the rays forming a partition.
  const int d = cfg.topology.branching;
  const VertexSubset delta = tree_delta(g);
  const std::vector<double> profile = density_profile(g, delta, g.origin(), cfg.topology.depth);
  bool structure_ok = true;
  for (int n = 1; n <= cfg.topology.depth; ++n) {
    // Heads within depth n: 1 (root) + d (level 1) + (d+1)(d^{n-1}-1) deeper.
    double heads = 1.0 + d;
    double ball_sz = 1.0 + (d + 1.0);
    double level = static_cast<double>(d + 1);
    for (int l = 2; l <= n; ++l) {
      level *= d;
      ball_sz += level;
      heads += level * (d - 1.0) / d;
    }
    if (std::abs(profile[static_cast<std::size_t>(n - 1)] - heads / ball_sz) > 1e-12) {
      structure_ok = false;
    }
  }
  {
    const std::vector<VertexId> heads = ray_heads(g);
    std::vector<std::uint32_t> covered(g.vertex_count(), 0);
    for (VertexId h = 0; h < g.vertex_count(); ++h) {
      if (!delta.contains(h)) continue;
      for (VertexId v : ray(g, h)) ++covered[v];
    }
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (covered[v] != 1 || !delta.contains(heads[v])) structure_ok = false;
    }
  }
  out.results["delta_profile_exact"] = structure_ok;
  out.results["delta_density_limit"] = (d - 1.0) / d;

  // Pathwise domination and the per-ray law against a direct half-line run.
  const int ray_len = cfg.topology.depth + 1;
  const GraphTopology half = GraphTopology::build(HalfLineExtent{ray_len});
  out.topology_hashes.push_back(half.hash());

  std::vector<double> probes = cfg.t_grid;
  if (probes.empty()) probes = {0.5, 1.0, 2.0};
  std::atomic<std::uint64_t> violations{0};
  std::vector<std::uint64_t> tree_zero(probes.size(), 0), half_zero(probes.size(), 0);
  std::vector<std::uint8_t> tree_occ(cfg.replicas, 0), half_occ(cfg.replicas, 0);
  std::vector<BitRow> tree_bits(cfg.replicas), half_bits(cfg.replicas);

  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r);
    EventTimeline tl =
        EventTimeline::generate(g, cfg.lambda, {-cfg.t_back, 0.0}, key.child({kTagMainPhase}));
    Trajectory eta = evolve(tl, config_ones(g.vertex_count()));
    Trajectory xi = ray_constrained_process(tl);
    if (!pathwise_leq(xi, eta)) violations.fetch_add(1);

    EventTimeline tlh = EventTimeline::generate(half, cfg.lambda, {-cfg.t_back, 0.0},
                                                key.child({kTagHalfline}));
    Trajectory hp = evolve(tlh, config_ones(half.vertex_count()));

    BitRow tb(probes.size()), hb(probes.size());
    for (std::size_t j = 0; j < probes.size(); ++j) {
      tb[j] = xi.zero_run(g.origin(), -probes[j], 0.0) ? 1 : 0;
      hb[j] = hp.zero_run(0, -probes[j], 0.0) ? 1 : 0;
    }
    tree_bits[r] = std::move(tb);
    half_bits[r] = std::move(hb);
    tree_occ[r] = xi.bit_at(g.origin(), 0.0);
    half_occ[r] = hp.bit_at(0, 0.0);
  });
  for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
    for (std::size_t j = 0; j < probes.size(); ++j) {
      tree_zero[j] += tree_bits[r][j];
      half_zero[j] += half_bits[r][j];
    }
  }

  bool laws_ok = true;
  std::string csv = "interval,tree_p,tree_lo,tree_hi,half_p,half_lo,half_hi,compatible\n";
  nlohmann::json law = nlohmann::json::array();
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const Estimate a = wilson_estimate(tree_zero[j], cfg.replicas, cfg.conf_z);
    const Estimate b = wilson_estimate(half_zero[j], cfg.replicas, cfg.conf_z);
    const bool ok = estimates_compatible(a, b, cfg.conf_z);
    laws_ok = laws_ok && ok;
    law.push_back({{"interval", probes[j]},
                   {"constrained", estimate_json(a)},
                   {"half_line", estimate_json(b)},
                   {"compatible", ok}});
    csv += num_str(probes[j]) + "," + csv_estimate(a) + "," + csv_estimate(b) + "," +
           (ok ? "1" : "0") + "\n";
  }
  {
    std::uint64_t to = 0, ho = 0;
    for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
      to += tree_occ[r];
      ho += half_occ[r];
    }
    const Estimate a = wilson_estimate(to, cfg.replicas, cfg.conf_z);
    const Estimate b = wilson_estimate(ho, cfg.replicas, cfg.conf_z);
    const bool ok = estimates_compatible(a, b, cfg.conf_z);
    laws_ok = laws_ok && ok;
    out.results["occupancy_constrained"] = estimate_json(a);
    out.results["occupancy_half_line"] = estimate_json(b);
    out.results["occupancy_compatible"] = ok;
  }

  out.results["domination_violations"] = violations.load();
  out.results["zero_run_laws"] = law;
  out.results["laws_compatible"] = laws_ok;
  out.artifacts.push_back({"tree_law.csv", csv});
  out.settle(gate_ok && structure_ok && violations.load() == 0 && laws_ok, !gate_ok);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: slab-domination
// ---------------------------------------------------------------------------

DriverResult run_slab_domination(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "lattice", "slab-domination: topology must be a lattice");
  require(cfg.n_max >= 1 && cfg.cond_past >= 0, "slab-domination: bad grid");
  const double span = cfg.t_back + cfg.step * (cfg.n_max + cfg.cond_past);
  int pad = 0;
  const GraphTopology g = padded_graph(cfg, span, &pad);
  out.topology_hashes.push_back(g.hash());

  bool gate_ok = false;
  out.results["gate"] = survival_gate(g, cfg, &gate_ok);
  out.results["pad"] = pad;

  // Observed sites per time index.  "set"/"sublattice": a fixed block whose
  // row-max gives the indicator; "diagonal": a moving single site i -> i.
  std::vector<VertexId> block;
  if (cfg.delta_mode == "set") {
    require(!cfg.delta_sites.empty(), "slab-domination: delta_sites empty");
    for (int x : cfg.delta_sites) block.push_back(axis_site(g, x));
  } else if (cfg.delta_mode == "sublattice") {
    require(cfg.delta_m >= 1, "slab-domination: delta_m must be >= 1 for sublattice mode");
    for (int x = 0; x < cfg.delta_m; ++x) block.push_back(axis_site(g, x));
  } else if (cfg.delta_mode == "diagonal") {
    for (int i = -cfg.cond_past; i <= cfg.n_max; ++i) block.push_back(axis_site(g, i));
  } else {
    fail("slab-domination: unknown delta_mode " + cfg.delta_mode);
  }

  StationaryGridJob job;
  job.graph = &g;
  job.sites = block;
  job.step = cfg.step;
  job.lo_idx = -cfg.cond_past;
  job.hi_idx = cfg.n_max;
  job.t_back = cfg.t_back;
  job.lambda = cfg.lambda;
  const std::vector<BitRow> raw = stationary_grid_rows(job, cfg);

  // Reduce to one indicator per time index.
  const int idx_count = cfg.n_max + cfg.cond_past + 1;
  std::vector<BitRow> rows(raw.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    BitRow row(static_cast<std::size_t>(idx_count));
    for (int i = 0; i < idx_count; ++i) {
      std::uint8_t m = 0;
      if (cfg.delta_mode == "diagonal") {
        m = raw[r][static_cast<std::size_t>(i) * block.size() + static_cast<std::size_t>(i)];
      } else {
        for (std::size_t sj = 0; sj < block.size(); ++sj) {
          m |= raw[r][static_cast<std::size_t>(i) * block.size() + sj];
        }
      }
      row[static_cast<std::size_t>(i)] = m;
    }
    rows[r] = std::move(row);
  }

  // Columns: index i lives at column i + cond_past; the curve uses i=1..n_max.
  std::vector<BitRow> curve_rows(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    curve_rows[r] = BitRow(rows[r].begin() + cfg.cond_past + 1, rows[r].end());
  }
  const AllZeroCurve curve = allzero_curve(curve_rows, cfg.n_max, cfg.conf_z);

  nlohmann::json cond_json;
  bool cond_ok = true, cond_starved = false;
  if (cfg.cond_past > 0) {
    std::vector<std::uint32_t> given;
    for (int j = 1; j <= cfg.cond_past; ++j) {
      given.push_back(static_cast<std::uint32_t>(cfg.cond_past - j));  // indices -1..-cond_past
    }
    const ConditionalCheck cc =
        conditional_criterion(rows, static_cast<std::uint32_t>(cfg.cond_past), given,
                              curve.rho_floor, cfg.conf_z, cfg.min_hits);
    cond_ok = cc.pass;
    cond_starved = cc.starved;
    cond_json = {{"conditional", estimate_json(cc.conditional)},
                 {"floor", cc.floor},
                 {"condition_hits", cc.condition_hits},
                 {"starved", cc.starved},
                 {"pass", cc.pass}};
    out.results["conditional"] = cond_json;
  }

  out.results["rho_floor"] = curve.rho_floor;
  out.results["rho_floor_point"] = curve.rho_floor_point;
  out.results["curve_pass"] = curve.pass;
  nlohmann::json qs = nlohmann::json::array();
  std::string curve_csv = "n,p_hat,ci_lo,ci_hi\n";
  for (int n = 1; n <= cfg.n_max; ++n) {
    const Estimate& e = curve.q[static_cast<std::size_t>(n - 1)];
    qs.push_back(estimate_json(e));
    curve_csv += std::to_string(n) + "," + csv_estimate(e) + "\n";
  }
  out.results["all_zero"] = qs;
  out.artifacts.push_back({"curve.csv", curve_csv});

  // Raw per-replica indicator rows (replica order = replica index).
  std::string rows_csv = "replica";
  for (int i = -cfg.cond_past; i <= cfg.n_max; ++i) rows_csv += ",i" + std::to_string(i);
  rows_csv += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows_csv += std::to_string(r);
    for (std::uint8_t b : rows[r]) rows_csv += b ? ",1" : ",0";
    rows_csv += "\n";
  }
  out.artifacts.push_back({"rows.csv", rows_csv});

  out.settle(gate_ok && curve.pass && cond_ok, !gate_ok || cond_starved);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: single-site-spinflip
// ---------------------------------------------------------------------------

DriverResult run_single_site_spinflip(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "half-line", "single-site-spinflip: topology must be a half-line");

  // Phase 1: extinction of the single-seed process (also the survival gate).
  const GraphTopology g_ext = cfg.topology.build();
  out.topology_hashes.push_back(g_ext.hash());
  std::vector<ExtinctionSample> ext(cfg.replicas);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({kTagExtinction});
    ext[r] = extinction_time(g_ext, 0, cfg.lambda, cfg.horizon, key, cfg.chunk);
  });
  const ExtinctionTail tail = extinction_tail(ext, cfg.s0, 12, cfg.conf_z);
  const bool survival_ok = tail.survival.lo > 0.0;

  out.results["survival"] = estimate_json(tail.survival);
  out.results["finite_taus"] = tail.finite;
  out.results["tail_rate"] = tail.rate;
  out.results["tail_rate_lo"] = tail.rate_lo;
  out.results["tail_rate_hi"] = tail.rate_hi;
  out.results["tail_fit"] = fit_json(tail.fit);
  out.results["tail_pass"] = tail.pass;

  std::string ext_csv = "replica,tau,censored\n";
  for (std::size_t r = 0; r < ext.size(); ++r) {
    ext_csv += std::to_string(r) + "," + num_str(ext[r].tau) + "," +
               (ext[r].censored ? "1" : "0") + "\n";
  }
  out.artifacts.push_back({"extinction.csv", ext_csv});
  std::string tail_csv = "s,p,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < tail.s_grid.size(); ++i) {
    tail_csv += num_str(tail.s_grid[i]) + "," + csv_estimate(tail.tail[i]) + "\n";
  }
  out.artifacts.push_back({"tail.csv", tail_csv});

  // Phase 2: stationary window at the boundary site -> zero-run surface,
  // zero-run curve, and the all-zero floor.
  std::vector<double> t_grid = cfg.t_grid;
  std::vector<double> u_grid = cfg.u_grid;
  if (t_grid.empty()) t_grid = {0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
  if (u_grid.empty()) u_grid = {0.0, 0.5, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> curve_t;
  for (int t = 1; t <= 10; ++t) curve_t.push_back(t);

  const double fwd = std::max({t_grid.back(), curve_t.back(), cfg.step * cfg.n_max});
  const double back = cfg.t_back + u_grid.back();
  ExperimentConfig pcfg = cfg;
  int pad = 0;
  const GraphTopology g = padded_graph(pcfg, back + fwd, &pad);
  out.topology_hashes.push_back(g.hash());
  out.results["pad"] = pad;

  std::vector<SitePath> paths(cfg.replicas);
  std::vector<BitRow> floor_rows(cfg.replicas);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({kTagMainPhase});
    EventTimeline tl = EventTimeline::generate(g, cfg.lambda, {-back, fwd}, key);
    Trajectory traj = evolve(tl, config_ones(g.vertex_count()));
    SitePath p = extract_site(traj, 0);
    BitRow row(static_cast<std::size_t>(cfg.n_max));
    for (int i = 1; i <= cfg.n_max; ++i) {
      row[static_cast<std::size_t>(i - 1)] = traj.bit_at(0, cfg.step * i);
    }
    paths[r] = std::move(p);
    floor_rows[r] = std::move(row);
  });

  const ZeroRunSurface surf = zero_run_surface(paths, t_grid, u_grid, cfg.conf_z);
  std::string f_csv = "t,u,value,lo,hi,cond_n\n";
  for (std::size_t ui = 0; ui < surf.u_grid.size(); ++ui) {
    for (std::size_t ti = 0; ti < surf.t_grid.size(); ++ti) {
      const Estimate& e = surf.f[ui][ti];
      f_csv += num_str(surf.t_grid[ti]) + "," + num_str(surf.u_grid[ui]) + "," +
               csv_estimate(e) + "," + std::to_string(e.n) + "\n";
    }
  }
  out.artifacts.push_back({"f_surface.csv", f_csv});
  out.results["surface_monotone_in_u"] = surf.monotone_in_u;
  out.results["surface_monotone_in_t"] = surf.monotone_in_t;
  out.results["surface_min_condition_hits"] = surf.min_condition_hits;

  // Unconditional zero-run curve and its log-linear rate.
  std::vector<std::uint64_t> hits(curve_t.size(), 0);
  for (const SitePath& p : paths) {
    for (std::size_t i = 0; i < curve_t.size(); ++i) {
      if (p.zero_run(0.0, curve_t[i])) ++hits[i];
    }
  }
  std::vector<double> xs, ys;
  std::string zr_csv = "t,p,ci_lo,ci_hi\n";
  nlohmann::json zr = nlohmann::json::array();
  for (std::size_t i = 0; i < curve_t.size(); ++i) {
    const Estimate e = wilson_estimate(hits[i], cfg.replicas, cfg.conf_z);
    zr.push_back(estimate_json(e));
    zr_csv += num_str(curve_t[i]) + "," + csv_estimate(e) + "\n";
    if (e.hits > 0) {
      xs.push_back(curve_t[i]);
      ys.push_back(e.value);
    }
  }
  const LineFit zr_fit = log_linear_fit(xs, ys);
  out.artifacts.push_back({"zerorun_curve.csv", zr_csv});
  out.results["zero_run_curve"] = zr;
  out.results["zero_run_fit"] = fit_json(zr_fit);
  out.results["rate_zero_run"] = -zr_fit.slope;

  // The all-zero floor on the unit grid and its implied per-unit rate; both
  // rates are reported side by side without adjudicating their order.
  const AllZeroCurve floor = allzero_curve(floor_rows, cfg.n_max, cfg.conf_z);
  out.results["rho_floor"] = floor.rho_floor;
  out.results["rho_floor_point"] = floor.rho_floor_point;
  out.results["floor_pass"] = floor.pass;
  out.results["rate_floor"] =
      floor.rho_floor > 0.0 ? -std::log1p(-floor.rho_floor) / cfg.step : 0.0;

  const bool pass = survival_ok && tail.pass && surf.monotone_in_u && zr_fit.ok &&
                    zr_fit.r2 >= 0.9 && floor.pass;
  out.settle(pass, !survival_ok);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: renewal
// ---------------------------------------------------------------------------

DriverResult run_renewal(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "lattice", "renewal: topology must be a lattice");
  const double span = cfg.t_back + cfg.step * cfg.n_max;
  int pad = 0;
  const GraphTopology g = padded_graph(cfg, span, &pad);
  out.topology_hashes.push_back(g.hash());
  out.results["pad"] = pad;

  bool gate_ok = false;
  out.results["gate"] = survival_gate(g, cfg, &gate_ok);

  const std::vector<VertexId> probes(static_cast<std::size_t>(cfg.n_max), g.origin());
  std::vector<RenewalRecord> recs(cfg.replicas);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({kTagMainPhase});
    EventTimeline tl = EventTimeline::generate(g, cfg.lambda, {-cfg.t_back, cfg.step * cfg.n_max},
                                               key);
    recs[r] = renewal_record(tl, probes, cfg.step);
  });
  const RenewalCurves curves = renewal_curves(recs, cfg.conf_z);

  out.results["inclusion_violations"] = curves.inclusion_violations;
  out.results["censor_fraction"] = curves.censor_fraction;
  out.results["record_fit"] = fit_json(curves.record_fit);
  out.results["curves_pass"] = curves.pass;

  std::string csv = "n,allzero_p,allzero_lo,allzero_hi,record_p,record_lo,record_hi\n";
  for (int n = 1; n <= curves.n_max; ++n) {
    csv += std::to_string(n) + "," + csv_estimate(curves.all_zero[static_cast<std::size_t>(n - 1)]) +
           "," + csv_estimate(curves.record[static_cast<std::size_t>(n - 1)]) + "\n";
  }
  out.artifacts.push_back({"renewal.csv", csv});

  std::string raw = "replica";
  for (int i = 1; i <= cfg.n_max; ++i) raw += ",d" + std::to_string(i);
  raw += "\n";
  for (std::size_t r = 0; r < recs.size(); ++r) {
    raw += std::to_string(r);
    for (std::int32_t dv : recs[r].d) raw += "," + std::to_string(dv);
    raw += "\n";
  }
  out.artifacts.push_back({"records.csv", raw});

  out.settle(gate_ok && curves.pass, !gate_ok);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: cone-mixing
// ---------------------------------------------------------------------------

DriverResult run_cone_mixing(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "lattice", "cone-mixing: topology must be a lattice");

  // Phase 1: stationary floor at the origin (with the conditional check).
  ExperimentConfig floor_cfg = cfg;
  floor_cfg.delta_mode = "sublattice";
  floor_cfg.delta_m = std::max(cfg.delta_m, 1);
  DriverResult floor_res = run_slab_domination(floor_cfg);
  const double rho = floor_res.results["rho_floor"].get<double>();
  const bool floor_pass = floor_res.results["curve_pass"].get<bool>();
  bool cond_ok = true, cond_starved = false;
  if (floor_res.results.contains("conditional")) {
    cond_ok = floor_res.results["conditional"]["pass"].get<bool>();
    cond_starved = floor_res.results["conditional"]["starved"].get<bool>();
  }
  out.results["floor"] = floor_res.results;
  for (auto& a : floor_res.artifacts) out.artifacts.push_back({"floor_" + a.name, a.bytes});
  for (std::uint64_t h : floor_res.topology_hashes) out.topology_hashes.push_back(h);

  require(rho > 0.0, "cone-mixing: no positive occupancy floor; cannot draw the initial field");

  // Phase 2: two processes on one timeline — a Bernoulli(rho) start on the
  // initial sublattice (the whole line when delta_m = 0) against the
  // all-ones start — tracked through their disagreement at the origin.
  int pad = 0;
  const GraphTopology g = padded_graph(cfg, cfg.s_max, &pad);
  out.topology_hashes.push_back(g.hash());
  out.results["pad"] = pad;
  const VertexId origin = g.origin();

  std::vector<double> s_grid;
  for (double s = 0.0; s <= cfg.s_max + 1e-9; s += cfg.step) s_grid.push_back(s);

  const VertexSubset sub = cfg.delta_m >= 1 ? sublattice(g, cfg.delta_m) : VertexSubset{};
  std::vector<BitRow> rows(cfg.replicas);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r);
    const Configuration mu = bernoulli_field(g, rho, cfg.delta_m >= 1 ? &sub : nullptr,
                                             key.child({kTagFieldDraw}));
    EventTimeline tl =
        EventTimeline::generate(g, cfg.lambda, {0.0, cfg.s_max}, key.child({kTagCoupling}));
    Trajectory low = evolve(tl, mu);
    Trajectory high = evolve(tl, config_ones(g.vertex_count()));
    BitRow row(s_grid.size());
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
      row[i] = low.bit_at(origin, s_grid[i]) != high.bit_at(origin, s_grid[i]) ? 1 : 0;
    }
    rows[r] = std::move(row);
  });

  std::vector<double> t_grid = cfg.t_grid;
  if (t_grid.empty()) {
    for (double t = 0.0; t <= cfg.s_max / 2.0 + 1e-9; t += cfg.step) t_grid.push_back(t);
  }
  const std::vector<double> site_norms = {0.0};  // the observed site is the origin
  const MixingCurve mix = mixing_curve(rows, s_grid, t_grid, site_norms, cfg.theta, cfg.fit_lo,
                                       cfg.fit_hi, cfg.conf_z);

  // At s = 0 the disagreement indicator is exactly "the drawn field is 0 at
  // the origin", a Bernoulli(1 - rho): tested with an exact binomial test.
  const double p0 = binomial_two_sided_p(mix.delta[0].hits, cfg.replicas, 1.0 - rho);
  const bool delta0_ok = p0 >= normal_two_sided_tail(4.0);

  out.results["rho_used"] = rho;
  out.results["delta0_binom_p"] = p0;
  out.results["delta0_ok"] = delta0_ok;
  out.results["delta_fit"] = fit_json(mix.delta_fit);
  out.results["phi_decreasing"] = mix.phi_decreasing;
  out.results["mixing_pass"] = mix.pass;

  std::string mix_csv = "s,delta,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    mix_csv += num_str(s_grid[i]) + "," + csv_estimate(mix.delta[i]) + "\n";
  }
  out.artifacts.push_back({"mixing.csv", mix_csv});
  std::string phi_csv = "t,phi\n";
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    phi_csv += num_str(t_grid[i]) + "," + num_str(mix.phi[i]) + "\n";
  }
  out.artifacts.push_back({"phi.csv", phi_csv});

  const bool insufficient = cond_starved || floor_res.exit_code == kExitInsufficient;
  out.settle(floor_pass && cond_ok && mix.pass && delta0_ok, insufficient);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: decay-obstruction
// ---------------------------------------------------------------------------

DriverResult run_decay_obstruction(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "lattice", "decay-obstruction: topology must be a lattice");
  require(!cfg.n_grid.empty() && !cfg.T_grid.empty(), "decay-obstruction: empty grids");

  int pad = 0;
  const GraphTopology g = padded_graph(cfg, cfg.t_back, &pad);
  out.topology_hashes.push_back(g.hash());
  out.results["pad"] = pad;

  std::vector<std::uint8_t> zero_at_origin(cfg.replicas, 0);
  parallel_replicas(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
    const RngKey key = replica_key(cfg.seed, r).child({kTagMainPhase});
    const StationarySample s = sample_stationary(g, cfg.lambda, cfg.t_back, key);
    zero_at_origin[r] = s.at_end.bits[g.origin()] == 0 ? 1 : 0;
  });
  std::uint64_t zeros = 0;
  for (std::uint8_t b : zero_at_origin) zeros += b;
  const Estimate nu0 = wilson_estimate(zeros, cfg.replicas, cfg.conf_z);

  // Ball counts come from an unpadded, wide-enough graph so no radius is
  // truncation-biased.
  int n_top = 0;
  for (int n : cfg.n_grid) n_top = std::max(n_top, n);
  const GraphTopology counting =
      GraphTopology::build(LatticeExtent{cfg.topology.dim, n_top + 2});
  const ObstructionTable tab =
      obstruction_table(counting, cfg.lambda, nu0, cfg.n_grid, cfg.T_grid);

  out.results["nu0"] = estimate_json(nu0);
  out.results["max_degree"] = tab.max_degree;
  out.results["decreasing_in_n"] = tab.decreasing_in_n;
  out.results["decreasing_in_T"] = tab.decreasing_in_t;

  std::string csv = "n,T,rate_max,rate_lo,rate_hi,ball,shell\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const ObstructionRow& r : tab.rows) {
    csv += std::to_string(r.n) + "," + num_str(r.T) + "," + num_str(r.rate_max) + "," +
           num_str(r.rate_lo) + "," + num_str(r.rate_hi) + "," + std::to_string(r.ball) + "," +
           std::to_string(r.shell) + "\n";
    rows.push_back({{"n", r.n},
                    {"T", r.T},
                    {"rate_max", r.rate_max},
                    {"rate_lo", r.rate_lo},
                    {"rate_hi", r.rate_hi},
                    {"ball", r.ball},
                    {"shell", r.shell}});
  }
  out.results["table"] = rows;
  out.artifacts.push_back({"obstruction.csv", csv});
  out.settle(tab.pass);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: dfkg
// ---------------------------------------------------------------------------

DriverResult run_dfkg(const ExperimentConfig& cfg) {
  DriverResult out;
  require(cfg.topology.kind == "lattice", "dfkg: topology must be a lattice");
  require(cfg.span >= 0 && cfg.time_points >= 1, "dfkg: bad grid");
  const double span_time = cfg.t_back + cfg.step * (cfg.time_points - 1);
  int pad = 0;
  const GraphTopology g = padded_graph(cfg, span_time, &pad);
  out.topology_hashes.push_back(g.hash());
  out.results["pad"] = pad;

  std::vector<VertexId> sites;
  for (int x = -cfg.span; x <= cfg.span; ++x) sites.push_back(axis_site(g, x));

  StationaryGridJob job;
  job.graph = &g;
  job.sites = sites;
  job.step = cfg.step;
  job.lo_idx = 0;
  job.hi_idx = cfg.time_points - 1;
  job.t_back = cfg.t_back;
  job.lambda = cfg.lambda;
  const std::vector<BitRow> rows = stationary_grid_rows(job, cfg);
  const std::uint32_t columns = static_cast<std::uint32_t>(sites.size()) *
                                static_cast<std::uint32_t>(cfg.time_points);

  // Random space-time probes: distinct columns x != y, plus 1-2 distinct
  // conditioning columns, all drawn from a dedicated stream.
  RngStream draw(RngKey{cfg.seed, derive_stream({kTagProbeDraw})});
  std::vector<CovarianceProbe> probes;
  while (probes.size() < cfg.probes) {
    CovarianceProbe p;
    p.x = static_cast<std::uint32_t>(draw.next_u64() % columns);
    p.y = static_cast<std::uint32_t>(draw.next_u64() % columns);
    if (p.x == p.y) continue;
    const int nz = 1 + static_cast<int>(draw.next_u64() % 2);
    bool clash = false;
    for (int k = 0; k < nz; ++k) {
      const std::uint32_t c = static_cast<std::uint32_t>(draw.next_u64() % columns);
      if (c == p.x || c == p.y) clash = true;
      for (std::uint32_t prev : p.given_zero) {
        if (prev == c) clash = true;
      }
      p.given_zero.push_back(c);
    }
    if (clash) continue;
    probes.push_back(std::move(p));
  }

  const CovarianceScan scan = covariance_scan(rows, probes, 3.0, cfg.min_hits);
  out.results["worst_z"] = scan.worst_z;
  out.results["starved_rows"] = scan.starved_rows;
  out.results["probes"] = probes.size();
  out.results["scan_pass"] = scan.pass;

  std::string csv = "x,y,zeros,cov,stderr,zscore,hits,starved\n";
  for (const auto& row : scan.rows) {
    std::string zs;
    for (std::uint32_t c : row.given_zero) zs += (zs.empty() ? "" : ";") + std::to_string(c);
    csv += std::to_string(row.x) + "," + std::to_string(row.y) + "," + zs + "," +
           num_str(row.cov) + "," + num_str(row.stderr_) + "," + num_str(row.zscore) + "," +
           std::to_string(row.hits) + "," + (row.starved ? "1" : "0") + "\n";
  }
  out.artifacts.push_back({"dfkg.csv", csv});

  const bool too_starved = scan.starved_rows * 2 > probes.size();
  out.settle(scan.pass, too_starved);
  return out;
}

// ---------------------------------------------------------------------------
// Driver: slab-scan
// ---------------------------------------------------------------------------

DriverResult run_slab_scan(const ExperimentConfig& cfg) {
  DriverResult out;
  require(!cfg.widths.empty(), "slab-scan: no widths");
  require(cfg.topology.kind == "slab", "slab-scan: topology must be a slab");
  const std::vector<SlabScanRow> rows =
      slab_survival_scan(cfg.topology.dim, cfg.topology.half_length, cfg.widths, cfg.lambda,
                         cfg.horizon, cfg.replicas, cfg.seed, cfg.conf_z, cfg.threads);

  // Wider slabs must not survive significantly less than narrower ones.
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[j].survival.hi < rows[i].survival.lo) monotone = false;
    }
  }

  std::string csv = "width,survival,ci_lo,ci_hi,finite,censored,tail_rate,tail_r2\n";
  nlohmann::json table = nlohmann::json::array();
  for (const SlabScanRow& r : rows) {
    csv += std::to_string(r.width) + "," + csv_estimate(r.survival) + "," +
           std::to_string(r.tail.finite) + "," + std::to_string(r.tail.censored) + "," +
           num_str(r.tail.rate) + "," + num_str(r.tail.fit.r2) + "\n";
    table.push_back({{"width", r.width},
                     {"survival", estimate_json(r.survival)},
                     {"tail_rate", r.tail.rate},
                     {"tail_fit", fit_json(r.tail.fit)}});
  }
  out.results["table"] = table;
  out.results["monotone"] = monotone;
  out.artifacts.push_back({"slab_scan.csv", csv});
  out.settle(monotone);
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch, manifest, persistence
// ---------------------------------------------------------------------------

DriverResult dispatch(const ExperimentConfig& cfg) {
  if (cfg.kind == "oracle-check") return run_oracle_check(cfg);
  if (cfg.kind == "upper-sample") return run_upper_sample(cfg);
  if (cfg.kind == "tree-domination") return run_tree_domination(cfg);
  if (cfg.kind == "slab-domination") return run_slab_domination(cfg);
  if (cfg.kind == "single-site-spinflip") return run_single_site_spinflip(cfg);
  if (cfg.kind == "renewal") return run_renewal(cfg);
  if (cfg.kind == "cone-mixing") return run_cone_mixing(cfg);
  if (cfg.kind == "decay-obstruction") return run_decay_obstruction(cfg);
  if (cfg.kind == "dfkg") return run_dfkg(cfg);
  if (cfg.kind == "slab-scan") return run_slab_scan(cfg);
  fail("unknown experiment kind: " + cfg.kind);
}

std::filesystem::path output_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  const char* env = std::getenv("CPLAB_OUT");
  const std::filesystem::path root = env != nullptr && *env != '\0' ? env : "runs";
  return root / (cfg.kind + "-" + hex64(cfg.hash()).substr(0, 12));
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto wall_start = std::chrono::system_clock::now();
  const auto tick = std::chrono::steady_clock::now();

  DriverResult res = dispatch(cfg);

  RunOutcome outcome;
  outcome.exit_code = res.exit_code;
  outcome.verdict = res.verdict;
  outcome.dir = output_dir(cfg);
  std::filesystem::create_directories(outcome.dir);

  nlohmann::json report;
  report["kind"] = cfg.kind;
  report["label"] = cfg.label;
  report["verdict"] = res.verdict;
  report["exit_code"] = res.exit_code;
  report["config"] = cfg.canonical_json();
  report["config_hash"] = hex64(cfg.hash());
  report["code_version"] = kCodeVersion;
  {
    nlohmann::json hs = nlohmann::json::array();
    for (std::uint64_t h : res.topology_hashes) hs.push_back(hex64(h));
    report["topology_hashes"] = hs;
  }
  report["results"] = res.results;
  outcome.report = report;

  std::vector<Artifact> artifacts = std::move(res.artifacts);
  artifacts.push_back({"report.json", report.dump(2) + "\n"});
  for (const Artifact& a : artifacts) write_atomic(outcome.dir, a);

  // Manifest: written last, and the only file whose bytes vary run-to-run
  // (wall clock); everything it inventories is deterministic.
  const auto wall_end = std::chrono::system_clock::now();
  nlohmann::json manifest;
  manifest["config"] = cfg.canonical_json();
  manifest["config_hash"] = hex64(cfg.hash());
  manifest["code_version"] = kCodeVersion;
  manifest["verdict"] = res.verdict;
  manifest["exit_code"] = res.exit_code;
  manifest["wall_clock_start"] =
      static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                    wall_start.time_since_epoch())
                                    .count());
  manifest["duration_ms"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                            tick)
          .count());
  (void)wall_end;
  {
    // Per-replica randomness is fully determined by (seed, index); the
    // manifest lists the first streams explicitly plus the derivation rule.
    nlohmann::json streams = nlohmann::json::array();
    const std::uint64_t listed = std::min<std::uint64_t>(cfg.replicas, 1024);
    for (std::uint64_t r = 0; r < listed; ++r) {
      streams.push_back(hex64(replica_key(cfg.seed, r).stream));
    }
    manifest["replica_streams"] = streams;
    manifest["replica_streams_listed"] = listed;
    manifest["replica_stream_rule"] = "stream(r) = mix64(seed+golden) xor mix64(r+0x5851f42d4c957f2d)";
  }
  {
    nlohmann::json inv = nlohmann::json::array();
    for (const Artifact& a : artifacts) {
      inv.push_back({{"file", a.name}, {"bytes", a.bytes.size()}, {"fnv1a", hex64(fnv1a(a.bytes))}});
    }
    manifest["artifacts"] = inv;
  }
  write_atomic(outcome.dir, {"manifest.json", manifest.dump(2) + "\n"});
  return outcome;
}

std::string export_timeline_text(const ExperimentConfig& cfg) {
  const GraphTopology g = cfg.topology.build();
  const RngKey key = replica_key(cfg.seed, 0).child({kTagMainPhase});
  const EventTimeline tl =
      EventTimeline::generate(g, cfg.lambda, {0.0, std::max(cfg.probe_time, cfg.step)}, key);
  std::ostringstream os;
  tl.export_events(os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() {
  return {"tree-domination", "halfline-spinflip", "lattice-finite-set",
          "lattice-slab",    "conditional-floor", "cone-mixing",
          "decay-obstruction", "renewal-bound",   "slab-scan"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.label = name;
  if (name == "tree-domination") {
    c.kind = "tree-domination";
    c.topology.kind = "tree";
    c.topology.branching = 2;
    c.topology.depth = 6;
    c.lambda = 4.5;  // comfortably above the surviving-phase threshold
    c.t_back = 20.0;
    c.replicas = 3000;
    c.t_grid = {0.5, 1.0, 2.0};
    c.seed = 7103;
  } else if (name == "halfline-spinflip") {
    c.kind = "single-site-spinflip";
    c.topology.kind = "half-line";
    c.topology.length = 200;
    c.lambda = 2.0;
    c.step = 1.0;
    c.replicas = 10000;
    c.horizon = 60.0;
    c.t_back = 20.0;
    c.s0 = 2.0;
    c.seed = 7104;
  } else if (name == "lattice-finite-set") {
    c.kind = "slab-domination";
    c.topology.kind = "lattice";
    c.topology.dim = 1;
    c.topology.radius = 2;
    c.lambda = 2.0;
    c.step = 1.0;
    c.n_max = 10;
    c.t_back = 20.0;
    c.delta_mode = "set";
    c.delta_sites = {-1, 0, 1};
    c.cond_past = 0;
    c.replicas = 10000;
    c.seed = 7105;
  } else if (name == "lattice-slab") {
    c.kind = "slab-domination";
    c.topology.kind = "lattice";
    c.topology.dim = 1;
    c.topology.radius = 3;
    c.lambda = 2.0;
    c.step = 1.0;
    c.n_max = 10;
    c.t_back = 20.0;
    c.delta_mode = "sublattice";
    c.delta_m = 3;
    c.cond_past = 0;
    c.replicas = 10000;
    c.seed = 7106;
  } else if (name == "conditional-floor") {
    c.kind = "slab-domination";
    c.topology.kind = "lattice";
    c.topology.dim = 1;
    c.topology.radius = 2;
    c.lambda = 2.0;
    c.step = 1.0;
    c.n_max = 10;
    c.t_back = 20.0;
    c.delta_mode = "sublattice";
    c.delta_m = 1;
    c.cond_past = 3;
    c.replicas = 20000;
    c.min_hits = 200;
    c.seed = 7107;
  } else if (name == "cone-mixing") {
    c.kind = "cone-mixing";
    c.topology.kind = "lattice";
    c.topology.dim = 1;
    c.topology.radius = 2;
    c.lambda = 2.0;
    c.step = 1.0;
    c.n_max = 10;
    c.t_back = 20.0;
    c.delta_m = 0;  // Bernoulli start on the whole padded line
    c.cond_past = 3;
    c.theta = 0.7853981633974483;
    c.s_max = 14.0;
    c.fit_lo = 2.0;
    c.fit_hi = 12.0;
    c.replicas = 12000;
    c.seed = 7108;
  } else if (name == "decay-obstruction") {
    c.kind = "decay-obstruction";
    c.topology.kind = "lattice";
    c.topology.dim = 1;
    c.topology.radius = 2;
    c.lambda = 2.0;
    c.t_back = 30.0;
    c.replicas = 6000;
    c.n_grid = {5, 10, 20};
    c.T_grid = {1.0, 10.0, 100.0};
    c.seed = 7109;
  } else if (name == "renewal-bound") {
    c.kind = "renewal";
    c.topology.kind = "lattice";
    c.topology.dim = 1;
    c.topology.radius = 2;
    c.lambda = 2.0;
    c.step = 1.0;
    c.n_max = 10;
    c.t_back = 20.0;
    c.replicas = 10000;
    c.seed = 7110;
  } else if (name == "slab-scan") {
    c.kind = "slab-scan";
    c.topology.kind = "slab";
    c.topology.dim = 2;
    c.topology.width = 1;
    c.topology.half_length = 15;
    c.lambda = 2.0;
    c.horizon = 40.0;
    c.widths = {1, 2, 3, 5, 8};
    c.replicas = 600;
    c.seed = 7111;
  } else {
    std::string names;
    for (const std::string& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    fail("unknown preset '" + name + "'; available: " + names);
  }
  return c;
}

}  // namespace cplab
