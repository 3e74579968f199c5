// Reproducible experiment runner: a flat config (JSON round-trippable, CLI
// overridable), one driver per experiment kind, deterministic report and CSV
// artifacts written atomically, and a manifest tying outputs to their inputs.
//
// Determinism contract: every output byte except the manifest's wall-clock
// fields is a pure function of the effective config.  Per-replica randomness
// is keyed by (master seed, replica index), so enlarging the replica count
// never changes the randomness of earlier replicas.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cplab/stats.hpp"
#include "cplab/topology.hpp"

namespace cplab {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct TopologySpec {
  std::string kind = "lattice";  // lattice | tree | half-line | slab | explicit
  std::string boundary = "free";
  int dim = 1;
  int radius = 10;
  int branching = 2;
  int depth = 4;
  int length = 100;
  int width = 1;
  int half_length = 25;
  std::uint32_t vertices = 0;                             // explicit
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // explicit

  TopologyExtent extent() const;
  BoundaryPolicy boundary_policy() const;
  GraphTopology build() const;

  friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

// Flat bag of parameters; each experiment kind reads the fields it needs and
// ignores the rest.  Every field serializes, so configs round-trip exactly.
struct ExperimentConfig {
  std::string kind = "oracle-check";
  // oracle-check | upper-sample | tree-domination | slab-domination |
  // single-site-spinflip | renewal | cone-mixing | decay-obstruction |
  // dfkg | slab-scan
  std::string label;
  TopologySpec topology;

  double lambda = 2.0;
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;  // empty: $CPLAB_OUT or ./runs, plus a config-hash name

  double t_back = 30.0;   // burn-in length for stationary starts
  double step = 1.0;      // grid step T
  int n_max = 10;         // all-zero curve depth / probe count
  int pad = -1;           // extra graph radius beyond the observed region; -1 = auto
  double horizon = 100.0; // extinction censoring time
  double chunk = 10.0;    // extinction timeline chunk
  double s0 = 2.0;        // tail fit threshold
  double theta = 0.7853981633974483;  // cone half-angle
  double conf_z = kZ95;   // z-score for all reported intervals

  double probe_time = 1.0;          // oracle-check observation time
  std::string init = "ones";        // oracle-check start: ones | single
  std::string delta_mode = "set";   // slab-domination: set | sublattice | diagonal
  std::vector<int> delta_sites;     // "set": coordinates along the long axis
  int delta_m = 1;                  // "sublattice": width; 0 = whole graph
  int cond_past = 3;                // conditional check: # past indices conditioned on
  std::uint64_t min_hits = 200;     // starvation threshold for conditioning

  std::vector<double> t_grid;  // zero-run surface / mixing aggregate times
  std::vector<double> u_grid;  // zero-run surface conditioning depths
  double s_max = 14.0;         // mixing curve horizon (grid = step multiples)
  double fit_lo = 2.0;         // mixing fit window
  double fit_hi = 12.0;
  std::vector<int> n_grid;     // obstruction radii
  std::vector<double> T_grid;  // obstruction time steps
  std::vector<int> widths;     // slab-scan widths
  int span = 2;                // dfkg: sites -span..span
  int time_points = 5;         // dfkg: grid times 0..time_points-1 (x step)
  std::uint64_t probes = 50;   // dfkg: number of random (x, y, zeros) triples
  double up_rate = 1.0;        // spin-flip on-rate

  nlohmann::json to_json() const;
  // to_json() minus the fields that only steer where and how outputs are
  // produced (out_dir, threads); the basis for hashing and for the config
  // embedded in artifacts, so results are invariant to delivery choices.
  nlohmann::json canonical_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  std::uint64_t hash() const;  // FNV over the canonical serialization

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names();
// Throws with the available names listed when `name` is unknown.
ExperimentConfig preset(const std::string& name);

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;
inline constexpr int kExitInsufficient = 3;

struct RunOutcome {
  int exit_code = kExitError;
  std::string verdict;  // PASS | FAIL | INSUFFICIENT
  std::filesystem::path dir;
  nlohmann::json report;
};

// Executes the experiment, writes report.json, the kind's CSV artifacts and
// manifest.json into the output directory (write-then-rename), and returns
// the verdict.  Configuration errors throw; statistical outcomes return.
RunOutcome run_experiment(const ExperimentConfig& cfg);

// The replica-0 timeline a config's main phase would consume (for export).
std::string export_timeline_text(const ExperimentConfig& cfg);

}  // namespace cplab
