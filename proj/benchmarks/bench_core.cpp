#include <benchmark/benchmark.h>

#include "strata/simulation.hpp"
#include "strata/sweep.hpp"
#include "strata/variance.hpp"

namespace {

using namespace strata;

DesignSpec bench_design() {
  return DesignSpec(Population({Stratum{1000, 0.9, 0.3},
                                Stratum{1000, 0.5, 0.5},
                                Stratum{1000, 0.1, 0.7}}),
                    1000);
}

void BM_VarianceTotals(benchmark::State& state) {
  const DesignSpec design = bench_design();
  const ResponseScenario scenario({0.8, 0.5, 0.2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(variance_ps_total(design, scenario));
    benchmark::DoNotOptimize(variance_err_total(design, scenario));
  }
}
BENCHMARK(BM_VarianceTotals);

void BM_DeltaVarianceGeneral(benchmark::State& state) {
  const CellProbabilities cells = cell_probabilities(0.5, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(delta_variance_general(1000.0, cells));
  }
}
BENCHMARK(BM_DeltaVarianceGeneral);

void BM_DrawStratum(benchmark::State& state) {
  const CellProbabilities cells = cell_probabilities(0.5, 0.4);
  std::mt19937_64 rng = replicate_engine(1, 0);
  const std::int64_t n = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_stratum(n, cells, rng));
  }
}
BENCHMARK(BM_DrawStratum)->Arg(100)->Arg(10000);

void BM_SweepCell(benchmark::State& state) {
  GridSpec spec;
  spec.q_values = default_q_grid();
  std::uint64_t index = 0;
  const std::uint64_t count = grid_cell_count(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_cell(spec, index));
    index = (index + 1) % count;
  }
}
BENCHMARK(BM_SweepCell);

void BM_MonteCarlo(benchmark::State& state) {
  const SimConfig config{bench_design(), ResponseScenario({0.8, 0.5, 0.2}),
                         Method::ERR, 200, 9, EmptyStratumPolicy::Discard};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_monte_carlo(config, 1));
  }
}
BENCHMARK(BM_MonteCarlo);

}  // namespace

BENCHMARK_MAIN();
