// cplab — command-line front end for the contact-process laboratory.
//
// Subcommands:
//   run <config.json>          execute the experiment described by a config file
//   preset <name>              execute a named built-in experiment
//   export-timeline <config>   print one replica's event timeline as text
//   oracle <topology> <l> <t>  print the exact finite-state distribution
//
// Exit codes: 0 = PASS, 1 = error, 2 = FAIL, 3 = insufficient statistics.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cplab/ctmc.hpp"
#include "cplab/experiment.hpp"
#include "cplab/util.hpp"

namespace {

using namespace cplab;

// Compact topology grammar: "halfline:LEN", "lattice:DIM:RADIUS",
// "tree:BRANCHING:DEPTH", "slab:DIM:WIDTH:HALFLEN", "edges:0-1,1-2,...".
TopologySpec parse_topology(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  require(!parts.empty(), "empty topology string");

  TopologySpec t;
  const std::string& kind = parts[0];
  auto num = [&](std::size_t i) {
    require(i < parts.size(), "topology '" + text + "': missing field " + std::to_string(i));
    return std::stoi(parts[i]);
  };
  if (kind == "halfline" || kind == "half-line") {
    t.kind = "half-line";
    t.length = num(1);
  } else if (kind == "lattice") {
    t.kind = "lattice";
    t.dim = num(1);
    t.radius = num(2);
  } else if (kind == "tree") {
    t.kind = "tree";
    t.branching = num(1);
    t.depth = num(2);
  } else if (kind == "slab") {
    t.kind = "slab";
    t.dim = num(1);
    t.width = num(2);
    t.half_length = num(3);
  } else if (kind == "edges") {
    t.kind = "explicit";
    require(parts.size() == 2, "edges topology: expected edges:A-B,C-D,...");
    std::uint32_t max_v = 0;
    std::string item;
    auto flush = [&](const std::string& s) {
      const auto dash = s.find('-');
      require(dash != std::string::npos, "edges topology: bad pair '" + s + "'");
      const std::uint32_t a = static_cast<std::uint32_t>(std::stoul(s.substr(0, dash)));
      const std::uint32_t b = static_cast<std::uint32_t>(std::stoul(s.substr(dash + 1)));
      t.edges.emplace_back(a, b);
      max_v = std::max({max_v, a, b});
    };
    for (char ch : parts[1]) {
      if (ch == ',') {
        flush(item);
        item.clear();
      } else {
        item += ch;
      }
    }
    flush(item);
    t.vertices = max_v + 1;
  } else {
    fail("unknown topology kind '" + kind + "'");
  }
  return t;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open config file: " + path);
  nlohmann::json j;
  is >> j;
  return ExperimentConfig::from_json(j);
}

struct Overrides {
  std::string out;
  std::int64_t seed = -1;
  std::int64_t replicas = -1;
  int threads = -1;

  void apply(ExperimentConfig& cfg) const {
    if (!out.empty()) cfg.out_dir = out;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (replicas >= 0) cfg.replicas = static_cast<std::uint64_t>(replicas);
    if (threads >= 0) cfg.threads = threads;
  }
};

int execute(ExperimentConfig cfg) {
  const RunOutcome outcome = run_experiment(cfg);
  std::cout << outcome.verdict << " " << cfg.kind << " -> " << outcome.dir.string() << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contact-process laboratory"};
  app.require_subcommand(1);

  std::string config_path, preset_name, topo_str;
  double oracle_lambda = 1.0, oracle_t = 1.0;
  std::string oracle_init = "ones";
  Overrides ov;

  CLI::App* run = app.add_subcommand("run", "execute an experiment from a config file");
  run->add_option("config", config_path, "path to a config JSON file")->required();
  run->add_option("--out", ov.out, "output directory");
  run->add_option("--seed", ov.seed, "master seed override");
  run->add_option("--replicas", ov.replicas, "replica count override");
  run->add_option("--threads", ov.threads, "worker thread count");

  CLI::App* pre = app.add_subcommand("preset", "execute a named built-in experiment");
  pre->add_option("name", preset_name, "preset name (see --list)")->required();
  pre->add_option("--out", ov.out, "output directory");
  pre->add_option("--seed", ov.seed, "master seed override");
  pre->add_option("--replicas", ov.replicas, "replica count override");
  pre->add_option("--threads", ov.threads, "worker thread count");

  CLI::App* lst = app.add_subcommand("presets", "list available presets");

  CLI::App* exp = app.add_subcommand("export-timeline", "print one replica's event timeline");
  exp->add_option("config", config_path, "path to a config JSON file")->required();

  CLI::App* orc = app.add_subcommand("oracle", "print the exact finite-state distribution");
  orc->add_option("topology", topo_str, "topology string, e.g. lattice:1:1 or edges:0-1,1-2")
      ->required();
  orc->add_option("lambda", oracle_lambda, "transmission rate per directed edge")->required();
  orc->add_option("t", oracle_t, "time at which to read the distribution")->required();
  orc->add_option("--init", oracle_init, "initial state: ones|single");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      ov.apply(cfg);
      return execute(std::move(cfg));
    }
    if (pre->parsed()) {
      ExperimentConfig cfg = cplab::preset(preset_name);
      ov.apply(cfg);
      return execute(std::move(cfg));
    }
    if (lst->parsed()) {
      for (const std::string& n : cplab::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (exp->parsed()) {
      std::cout << cplab::export_timeline_text(load_config(config_path));
      return 0;
    }
    if (orc->parsed()) {
      const cplab::GraphTopology g = parse_topology(topo_str).build();
      require(oracle_init == "ones" || oracle_init == "single", "--init must be ones|single");
      const cplab::Configuration init = oracle_init == "ones"
                                            ? cplab::config_ones(g.vertex_count())
                                            : cplab::config_single(g.vertex_count(), g.origin());
      const cplab::ExactDistribution d =
          cplab::exact_distribution(g, oracle_lambda, init, oracle_t);
      nlohmann::json j;
      j["topology"] = g.describe();
      j["topology_hash"] = cplab::hex64(g.hash());
      j["lambda"] = oracle_lambda;
      j["t"] = oracle_t;
      j["init"] = oracle_init;
      j["mass"] = d.mass();
      nlohmann::json marg = nlohmann::json::array();
      for (cplab::VertexId v = 0; v < g.vertex_count(); ++v) marg.push_back(d.marginal_one(v));
      j["marginal_one"] = marg;
      j["p"] = d.p;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cplab::kExitError;
  }
  return cplab::kExitError;
}
