// Microbenchmarks for the hot paths: timeline generation, forward evolution,
// backward traces, and the exact small-graph distribution.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>

#include "cplab/ctmc.hpp"
#include "cplab/harris.hpp"
#include "cplab/processes.hpp"
#include "cplab/rng.hpp"
#include "cplab/timeline.hpp"
#include "cplab/topology.hpp"

using namespace cplab;

namespace {

const GraphTopology& line_graph(int radius) {
  static std::map<int, GraphTopology> cache;
  auto it = cache.find(radius);
  if (it == cache.end()) it = cache.emplace(radius, GraphTopology::build(LatticeExtent{1, radius})).first;
  return it->second;
}

void BM_TimelineGenerate(benchmark::State& state) {
  const GraphTopology& g = line_graph(static_cast<int>(state.range(0)));
  const TimeWindow w{0.0, 20.0};
  std::uint64_t r = 0;
  for (auto _ : state) {
    const EventTimeline tl = EventTimeline::generate(g, 2.0, w, replica_key(1, r++));
    benchmark::DoNotOptimize(tl.events().size());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TimelineGenerate)->Arg(50)->Arg(200)->Arg(1000);

void BM_Evolve(benchmark::State& state) {
  const GraphTopology& g = line_graph(static_cast<int>(state.range(0)));
  const EventTimeline tl = EventTimeline::generate(g, 2.0, TimeWindow{0.0, 20.0}, replica_key(2, 7));
  const Configuration ones = config_ones(g.vertex_count());
  for (auto _ : state) {
    const Trajectory traj = evolve(tl, ones);
    benchmark::DoNotOptimize(traj.final_state().count_ones());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(tl.events().size()));
}
BENCHMARK(BM_Evolve)->Arg(50)->Arg(200)->Arg(1000);

void BM_BackwardTrace(benchmark::State& state) {
  const GraphTopology& g = line_graph(static_cast<int>(state.range(0)));
  const EventTimeline tl = EventTimeline::generate(g, 2.0, TimeWindow{-20.0, 0.0}, replica_key(3, 9));
  for (auto _ : state) {
    const BackwardTrace trace = backward_trace(tl, g.origin(), 0.0, -20.0);
    benchmark::DoNotOptimize(trace.died);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BackwardTrace)->Arg(50)->Arg(200)->Arg(1000);

void BM_RayConstrained(benchmark::State& state) {
  const GraphTopology g = GraphTopology::build(TreeExtent{2, static_cast<int>(state.range(0))});
  const EventTimeline tl = EventTimeline::generate(g, 3.0, TimeWindow{-10.0, 0.0}, replica_key(4, 3));
  for (auto _ : state) {
    const Trajectory xi = ray_constrained_process(tl);
    benchmark::DoNotOptimize(xi.final_state().count_ones());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RayConstrained)->Arg(4)->Arg(6)->Arg(8);

void BM_ExactDistribution(benchmark::State& state) {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{static_cast<int>(state.range(0))});
  const Configuration ones = config_ones(g.vertex_count());
  for (auto _ : state) {
    const ExactDistribution ex = exact_distribution(g, 1.5, ones, 1.0);
    benchmark::DoNotOptimize(ex.p[0]);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExactDistribution)->Arg(4)->Arg(8)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
