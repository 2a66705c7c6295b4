#include <benchmark/benchmark.h>

#include <cmath>

#include "fracorbit/fracops.hpp"

using namespace fracorbit;

static void CaputoL1(benchmark::State& state) {
    TimeGrid grid(1.0, static_cast<int>(state.range(0)));
    SampledFunction f = SampledFunction::sample(grid, [](double t) { return std::sin(3.0 * t); });
    for (auto _ : state) benchmark::DoNotOptimize(caputo_derivative(f, 0.7));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(CaputoL1)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void RlIntegral(benchmark::State& state) {
    TimeGrid grid(1.0, static_cast<int>(state.range(0)));
    SampledFunction f = SampledFunction::sample(grid, [](double t) { return std::exp(-t); });
    for (auto _ : state) benchmark::DoNotOptimize(rl_integral(f, 0.5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(RlIntegral)->RangeMultiplier(2)->Range(128, 2048)->Complexity();
