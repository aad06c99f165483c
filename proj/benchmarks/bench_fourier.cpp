#include "fdedep/fourier.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace fdedep;

static void BM_Coeffs(benchmark::State& state) {
    const auto triangle = [](double x) {
        return std::abs(std::fmod(x + std::numbers::pi + 2 * std::numbers::pi, 2 * std::numbers::pi) -
                        std::numbers::pi);
    };
    for (auto _ : state)
        benchmark::DoNotOptimize(fourier_coeffs(triangle, 256, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Coeffs)->Arg(4096)->Arg(32768)->Unit(benchmark::kMillisecond);

static void BM_PartialSum(benchmark::State& state) {
    const FourierCoeffs c = fourier_coeffs([](double x) { return std::cos(x); }, 256, 4096);
    const auto n = static_cast<std::size_t>(state.range(0));
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(partial_sum(c, n, x));
        x += 1e-3;
    }
}
BENCHMARK(BM_PartialSum)->Arg(9)->Arg(256);

static void BM_Application(benchmark::State& state) {
    FourierOptions o;
    o.c0 = 1.0;
    o.horizon = 1.0;
    o.orders = {1, 3, 9, 27};
    const Expr f = parse_expr("abs(mod(x + pi, 2*pi) - pi)", {.variables = {"x"}});
    for (auto _ : state) benchmark::DoNotOptimize(run_fourier_application(f, o));
}
BENCHMARK(BM_Application)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
