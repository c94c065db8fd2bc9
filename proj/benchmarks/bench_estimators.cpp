#include <benchmark/benchmark.h>

#include "mnar/bootstrap.hpp"
#include "mnar/ipw_gmm.hpp"
#include "mnar/outcome_regression.hpp"
#include "mnar/pipeline.hpp"
#include "mnar/propensity.hpp"
#include "mnar/simulation.hpp"

namespace {

using namespace mnar;

Dataset example_data(Index n) { return generate_dataset(example1(-1.7, 0.0), n, kDefaultSeed); }

void BM_FitProposed(benchmark::State& state) {
  const Dataset ds = example_data(state.range(0));
  const ModelConfig cfg = example1(-1.7, 0.0).model;
  for (auto _ : state) benchmark::DoNotOptimize(fit_proposed(ds, cfg).tau.tau_hat);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitProposed)->RangeMultiplier(4)->Range(500, 32000)->Complexity(benchmark::oN);

void BM_FitProposedNoVariance(benchmark::State& state) {
  const Dataset ds = example_data(state.range(0));
  const ModelConfig cfg = example1(-1.7, 0.0).model;
  FitOptions opts;
  opts.compute_variance = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit_proposed(ds, cfg, opts).tau.tau_hat);
}
BENCHMARK(BM_FitProposedNoVariance)->Arg(2000);

void BM_FitPropensity(benchmark::State& state) {
  const Dataset ds = example_data(state.range(0));
  const ModelConfig cfg = example1(-1.7, 0.0).model;
  const DesignMatrices dm = build_design(ds, cfg);
  const OutcomeFit outcome = fit_least_squares(ds, dm);
  const PropensityDesign design = make_propensity_design(ds, dm, predict_mu(outcome, dm));
  for (auto _ : state) benchmark::DoNotOptimize(fit_propensity(design, {}).theta_hat);
}
BENCHMARK(BM_FitPropensity)->Arg(2000)->Arg(20000);

void BM_SolveGmm(benchmark::State& state) {
  const Dataset ds = generate_dataset(example2(-2.7, 0.0), 2000, kDefaultSeed);
  const int degree = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_gmm(ds, {0}, degree).theta_hat);
}
BENCHMARK(BM_SolveGmm)->Arg(2)->Arg(3);

void BM_BootstrapT(benchmark::State& state) {
  const Dataset ds = example_data(500);
  const ModelConfig cfg = example1(-1.7, 0.0).model;
  BootstrapOptions opts;
  opts.resamples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_t_ci(ds, cfg, opts).ci.lower);
}
BENCHMARK(BM_BootstrapT)->Arg(99)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
