#include "fdedep/lab.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace fdedep;

namespace {

FnSeq bump(std::size_t k_max) {
    return {[](std::size_t k, std::span<const double> x) {
                const double n = static_cast<double>(k);
                return n * x[0] * std::exp(-n * x[0]);
            },
            [](std::span<const double>) { return 0.0; }, Box{{0.0}, {1.0}}, k_max};
}

} // namespace

static void BM_CrossCheck(benchmark::State& state) {
    LabConfig cfg;
    cfg.sample_points = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cross_check(bump(cfg.k_max), cfg));
}
BENCHMARK(BM_CrossCheck)->Arg(17)->Arg(161)->Unit(benchmark::kMillisecond);

static void BM_Uniform(benchmark::State& state) {
    const auto pts = grid_points(Box{{0.0}, {1.0}}, static_cast<std::size_t>(state.range(0)));
    const FnSeq seq = bump(256);
    for (auto _ : state) benchmark::DoNotOptimize(check_uniform_on_compacta(seq, pts, 1e-2, 128));
}
BENCHMARK(BM_Uniform)->Arg(1025)->Arg(10241)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
