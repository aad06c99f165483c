#include "fdedep/solver.hpp"

#include <benchmark/benchmark.h>

using namespace fdedep;

namespace {

ProblemSpec delay(double h, double horizon) {
    return make_problem(0.0, 1.0, h, horizon, [](double) { return Vec{1.0}; },
                        RhsSystem::parse({"-x[1](t-1)"}, 1.0));
}

} // namespace

static void BM_ApplyT(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    const ProblemSpec p = delay(h, 1.0);
    const EtaFn eta = EtaFn::zero(1.0, h, 1.0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(apply_T(p, eta, 1.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ApplyT)->Arg(1000)->Arg(10000);

static void BM_Picard(benchmark::State& state) {
    const ProblemSpec p = delay(1e-3, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(picard_solve(p, 1.0, 2.0, 1e-10, 200));
}
BENCHMARK(BM_Picard);

static void BM_Solve(benchmark::State& state) {
    const ProblemSpec p = delay(1.0 / static_cast<double>(state.range(0)), 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_Solve)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_SolveRotation(benchmark::State& state) {
    const ProblemSpec p = make_problem(0.0, 0.0, 1e-3, 2.0, [](double) { return Vec{1.0, 0.0}; },
                                       RhsSystem::parse({"-x[2](t-0)", "x[1](t-0)"}, 0.0));
    for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_SolveRotation)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
