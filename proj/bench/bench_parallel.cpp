// Serial reference vs OpenMP dispatch for the replicate-run kernels.

#include <benchmark/benchmark.h>

#ifdef SELFTUNE_OPENMP
#include <omp.h>
#endif

#include "selftune/problems.hpp"
#include "selftune/tuner.hpp"

using namespace selftune;

namespace {

MetaObjectiveSpec sphere_spec(std::size_t repeats) {
  MetaObjectiveSpec spec;
  spec.problem = make_problem("sphere", {.dimension = 8});
  spec.repeats = repeats;
  return spec;
}

FireflyParams tuned_sphere() {
  FireflyParams p;
  p.gamma = 0.6;
  p.theta = 0.9;
  return p;
}

void BM_fa_run_sphere(benchmark::State& state) {
  const Problem problem = make_problem("sphere", {.dimension = 8});
  const FireflyParams p = tuned_sphere();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fa_run(problem, p, 1e-5, seed++));
}
BENCHMARK(BM_fa_run_sphere)->Unit(benchmark::kMillisecond);

void BM_measure_t_delta_serial(benchmark::State& state) {
  const MetaObjectiveSpec spec = sphere_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measure_t_delta_serial(tuned_sphere(), spec, 1));
}
BENCHMARK(BM_measure_t_delta_serial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_measure_t_delta_parallel(benchmark::State& state) {
  const MetaObjectiveSpec spec = sphere_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measure_t_delta(tuned_sphere(), spec, 1, Execution::parallel));
}
BENCHMARK(BM_measure_t_delta_parallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void campaign(benchmark::State& state, Execution execution) {
  MetaObjectiveSpec spec = sphere_spec(3);
  spec.problem = make_problem("sphere", {.dimension = 4});
  spec.inner_cap = 500;
  FireflyParams meta = default_meta_params();
  meta.population = 4;
  meta.max_iter = 4;
  CampaignOptions options;
  options.execution = execution;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tuning_campaign(spec, MetaSearchSpace{}, meta, 8, 1, options));
  }
}

void BM_campaign_serial(benchmark::State& state) { campaign(state, Execution::serial); }
void BM_campaign_parallel(benchmark::State& state) { campaign(state, Execution::parallel); }
BENCHMARK(BM_campaign_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_campaign_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
#ifdef SELFTUNE_OPENMP
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
#endif
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
