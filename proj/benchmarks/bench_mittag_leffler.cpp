#include <benchmark/benchmark.h>

#include "fracorbit/mittag_leffler.hpp"

using namespace fracorbit;

static void MLSeriesZone(benchmark::State& state) {
    MLParams p(state.range(0) / 10.0, 1.0);
    double x = 2.0;
    for (auto _ : state) benchmark::DoNotOptimize(mittag_leffler(p, -x));
}
BENCHMARK(MLSeriesZone)->Arg(5)->Arg(13)->Arg(17);

static void MLAsymptoticZone(benchmark::State& state) {
    MLParams p(state.range(0) / 10.0, 1.0);
    double x = 5000.0;
    for (auto _ : state) benchmark::DoNotOptimize(mittag_leffler(p, -x));
}
BENCHMARK(MLAsymptoticZone)->Arg(5)->Arg(13)->Arg(17);

static void MLIntegralZone(benchmark::State& state) {
    MLParams p(0.15, 1.0);
    double x = 1.3;  // small-beta gap served by the spectral integral
    for (auto _ : state) benchmark::DoNotOptimize(mittag_leffler(p, -x));
}
BENCHMARK(MLIntegralZone);

static void RelaxationKernel(benchmark::State& state) {
    FracOrder alpha(0.7);
    double t = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(relaxation_kernel(alpha, 25.0, t));
        t = t < 1.0 ? t + 1e-3 : 0.01;
    }
}
BENCHMARK(RelaxationKernel);
