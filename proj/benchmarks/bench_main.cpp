#include <benchmark/benchmark.h>

#include <cmath>

#include "harvest/analytic.hpp"
#include "harvest/model.hpp"
#include "harvest/payoff.hpp"
#include "harvest/rng.hpp"
#include "harvest/simulate.hpp"

using namespace harvest;

namespace {

const Example1Params kCase2{0.05, 0.12, 0.3, 0.2, 1.0, 1.0, 0.1};
const Example1Params kCase3{0.05, 0.2, 0.3, 0.3, 1.0, 1.0, 0.1};
const Example1Params kEx2{1.0, 1.5, 1.4142135623730951, 2.0, 1.0, 1.0, 0.25};

void BM_BarrierPath(benchmark::State& state) {
    const auto model = example_model(kEx2);
    const auto q = example_generator(kEx2);
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 1.0;
    cfg.coalesce = state.range(0) != 0;
    const StrategySpec s{Barrier{2.0, 0.0}};
    const auto f = YieldFunction::power_decay(0.75);
    Seed seed = 0;
    std::size_t points = 0;
    for (auto _ : state) {
        cfg.seed = mix_seed(1, seed++);
        const auto p = simulate_harvested(model, q, s, f, 1.0, 0, cfg);
        points += p.times.size();
        benchmark::DoNotOptimize(p.x.back());
    }
    state.counters["points/path"] = benchmark::Counter(static_cast<double>(points) / state.iterations());
}
BENCHMARK(BM_BarrierPath)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_EstimateRegimeTriggered(benchmark::State& state) {
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 50.0;
    cfg.stop_when_exhausted = true;
    McConfig mc;
    mc.n_paths = 1000;
    mc.threads = static_cast<unsigned>(state.range(0));
    const StrategySpec s{RegimeTriggeredDepletion{{0}}};
    const auto f = YieldFunction::constant({1.0, 1.0});
    for (auto _ : state) {
        const auto e = estimate_J(example_model(kCase2), example_generator(kCase2), s, f, kCase2.r, 1.0, 1, cfg, mc);
        benchmark::DoNotOptimize(e.mean);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EstimateRegimeTriggered)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_CharacteristicRoots(benchmark::State& state) {
    for (auto _ : state) {
        const auto r = characteristic_roots(kCase3);
        benchmark::DoNotOptimize(r.beta[0]);
    }
}
BENCHMARK(BM_CharacteristicRoots);

void BM_GeneratorApply(benchmark::State& state) {
    const auto grid = uniform_grid(0.1, 20.0, static_cast<std::size_t>(state.range(0)));
    const auto h = GridFunction::sample(grid, 2, [](double x, Regime a) { return std::sqrt(x) + a; });
    const auto model = example_model(kCase2);
    const auto q = example_generator(kCase2);
    for (auto _ : state) {
        const auto out = generator_apply(h, model, q, 0.1);
        benchmark::DoNotOptimize(out.values(0, 0));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GeneratorApply)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

}  // namespace
BENCHMARK_MAIN();
