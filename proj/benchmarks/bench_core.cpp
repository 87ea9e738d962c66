#include <benchmark/benchmark.h>

#include <random>

#include <genfpk/genfpk.hpp>

using namespace genfpk;

namespace {

Scenario linear_scenario(double t_end) {
  NoiseSpec noise;
  noise.kernel = OuKernel{1.0, 1.0, OuConvention::plain};
  noise.mean_value = 0.2;
  return Scenario(ModelSpec({{1, -0.8}}, 0.2, 0.0, t_end), noise, InitialSpec(-0.7, 0.0225));
}

}  // namespace

static void BM_AssembleSystemFox(benchmark::State& state) {
  const Scenario sc = bistable_scenario(1.0, 0.1);
  const PufemSpace space(build_cover(-2.6, 2.6, static_cast<int>(state.range(0))), 2, 4);
  const DriftCoefficient drift(sc);
  const auto profile = fox_diffusion(sc).at(5.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_system(space, drift, profile, 5.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleSystemFox)->RangeMultiplier(2)->Range(25, 200)->Complexity(benchmark::oN);

static void BM_CrankNicolsonStep(benchmark::State& state) {
  const Scenario sc = bistable_scenario(1.0, 0.1);
  const PufemSpace space(build_cover(-2.6, 2.6, static_cast<int>(state.range(0))), 2, 4);
  const auto backend = state.range(1) ? LinearBackend::banded : LinearBackend::dense;
  const DriftCoefficient drift(sc);
  const auto profile = fox_diffusion(sc).at(5.0);
  const Eigen::MatrixXd C = assemble_mass(space);
  const Eigen::MatrixXd A = assemble_system(space, drift, profile, 5.0);
  const Eigen::VectorXd w = fit_initial(space, C, [](double x) { return gaussian_pdf(0.0, 0.36, x); });
  for (auto _ : state) benchmark::DoNotOptimize(crank_nicolson_step(space, C, A, A, w, 1e-3, backend));
  state.SetLabel(state.range(1) ? "banded" : "dense");
}
BENCHMARK(BM_CrankNicolsonStep)->ArgsProduct({{25, 50, 100, 200}, {0, 1}});

static void BM_OuMemoryAdvance(benchmark::State& state) {
  const Scenario sc = bistable_scenario(1.0, 1.0);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    MomentHistory history({3});
    history.append(0.0, -0.5, {1.0});
    OuMemory memory(sc, order);
    state.ResumeTiming();
    for (int i = 1; i <= 1000; ++i) {
      history.append(i * 0.01, -0.5, {1.0});
      benchmark::DoNotOptimize(memory.evaluate(history));
      memory.commit(history);
    }
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_OuMemoryAdvance)->Arg(2)->Arg(4)->Arg(6);

static void BM_KdeEstimate(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& x : samples) x = z(rng);
  const auto grid = linspace(-5.0, 5.0, 401);
  for (auto _ : state) benchmark::DoNotOptimize(kde_estimate(samples, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdeEstimate)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

static void BM_IntegratePaths(benchmark::State& state) {
  const Scenario sc = bistable_scenario(1.0, 1.0, 0.6, 5.0);
  const int paths = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_paths(sc, default_mc_dt(sc), {5.0}, paths, 3, 1));
  state.SetItemsProcessed(state.iterations() * paths);
}
BENCHMARK(BM_IntegratePaths)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_SolveLinear(benchmark::State& state) {
  const Scenario sc = linear_scenario(2.5);
  SolveConfig cfg;
  cfg.K = static_cast<int>(state.range(0));
  cfg.energy_diagnostics = false;
  cfg.backend = LinearBackend::banded;
  for (auto _ : state) benchmark::DoNotOptimize(solve(sc, cfg));
}
BENCHMARK(BM_SolveLinear)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_SolveVada(benchmark::State& state) {
  const Scenario sc = bistable_scenario(1.0, 1.0, 0.6, 1.0);
  SolveConfig cfg;
  cfg.method = Method::vada;
  cfg.vada_order = static_cast<int>(state.range(0));
  cfg.domain = std::make_pair(-3.0, 3.0);
  cfg.energy_diagnostics = false;
  cfg.backend = LinearBackend::banded;
  for (auto _ : state) benchmark::DoNotOptimize(solve(sc, cfg));
}
BENCHMARK(BM_SolveVada)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
