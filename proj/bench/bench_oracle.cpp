#include <benchmark/benchmark.h>

#include "resmgm/oracle.hpp"
#include "resmgm/workload.hpp"

namespace {

resmgm::Scenario bench_scenario(int cores_per_tile) {
  const resmgm::Topology topology = resmgm::build_grid_topology(
      2, 1, cores_per_tile, std::vector<resmgm::ResourceType>{resmgm::ResourceType::kRegular});
  resmgm::WorkloadParams params;
  params.apriori_load = 0.4;
  params.num_apriori = 2;
  params.max_res_per_agent = 4;
  return resmgm::generate_scenario(topology, params, 11);
}

void BM_OracleSerial(benchmark::State& state) {
  const resmgm::Scenario s = bench_scenario(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(resmgm::brute_force_optimal_serial(s, true));
}

void BM_OracleParallel(benchmark::State& state) {
  const resmgm::Scenario s = bench_scenario(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(resmgm::brute_force_optimal(s, true));
}

}  // namespace

BENCHMARK(BM_OracleSerial)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
