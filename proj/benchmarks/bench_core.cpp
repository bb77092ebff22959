#include <benchmark/benchmark.h>

#include <random>

#include "bsderep/bsde_solver.hpp"
#include "bsderep/families.hpp"
#include "bsderep/regression.hpp"
#include "bsderep/stochastic_engine.hpp"

using namespace bsderep;

static void BM_SampleBrownian(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const TimeGrid grid(0.0, 0.125, 64);
    for (auto _ : state) benchmark::DoNotOptimize(sample_brownian(grid, 3, 1, n));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * 64 * 3);
}
BENCHMARK(BM_SampleBrownian)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_HittingTime(benchmark::State& state) {
    const auto batch = sample_brownian(TimeGrid(0.0, 0.125, 64), 1, 1, 100000);
    const auto phi = [](const PathContext&) { return 1.0; };
    for (auto _ : state) benchmark::DoNotOptimize(hitting_time(batch, phi));
}
BENCHMARK(BM_HittingTime)->Unit(benchmark::kMillisecond);

static void BM_RegressionFit(benchmark::State& state) {
    const std::size_t n = 100000, d = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<double> x(n * d), y(n);
    for (auto& v : x) v = n01(rng);
    for (auto& v : y) v = n01(rng);
    for (auto _ : state) {
        PolynomialRegression reg(x, n, d, 2, 1.0, 1);
        benchmark::DoNotOptimize(reg.fitted(y));
    }
}
BENCHMARK(BM_RegressionFit)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_SolvePicardLsmc(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto steps = static_cast<std::size_t>(state.range(1));
    const std::vector<double> z{2.0};
    const auto batch = hitting_time(sample_brownian(TimeGrid(0.0, 0.0625, steps), 1, 1, n), {});
    const auto term = stopped_terminal(batch, 1.0, z);
    const auto g = pure_quadratic_generator(0.5);
    SolverConfig cfg;
    cfg.jobs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(solve(g.eval, term, batch, cfg));
}
BENCHMARK(BM_SolvePicardLsmc)->Args({10000, 32})->Args({100000, 32})->Args({100000, 64})->Unit(benchmark::kMillisecond);

static void BM_NestedMc(benchmark::State& state) {
    NestedMcConfig cfg;
    cfg.outer = 100;
    cfg.steps = static_cast<std::size_t>(state.range(0));
    const std::vector<double> z{0.5};
    const auto g = linear_generator(1.0, {0.0}, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(nested_mc(g.eval, 1.0, z, 0.0, 0.1, {}, cfg));
    state.counters["evaluations"] = nested_mc_cost(cfg);
}
BENCHMARK(BM_NestedMc)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Pde1d(benchmark::State& state) {
    Pde1dConfig cfg;
    cfg.space_intervals = static_cast<std::size_t>(state.range(0));
    cfg.gamma = 0.5;
    const auto g = pure_quadratic_generator(0.5);
    for (auto _ : state) benchmark::DoNotOptimize(solve_pde_1d(g.eval, 1.0, 2.0, 0.0, 0.1, {}, cfg));
}
BENCHMARK(BM_Pde1d)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_ComplianceH1(benchmark::State& state) {
    const auto g = cubic_damped_generator(0.5);
    DomainSampler sampler;
    for (auto _ : state) benchmark::DoNotOptimize(check_h1(g, sampler, 4000, 3));
}
BENCHMARK(BM_ComplianceH1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
