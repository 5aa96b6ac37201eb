#include "exitlab/montecarlo.hpp"

#include <benchmark/benchmark.h>

namespace {

using exitlab::geometry::Domain;
using exitlab::montecarlo::StepPolicy;
namespace kernels = exitlab::montecarlo::kernels;

const std::vector<double> kHorizons{0.5, 1.0, 2.0, 4.0, 8.0, 12.0};

void BM_SurvivorsSerial(benchmark::State& state) {
    const Domain cross = Domain::cross();
    const StepPolicy policy;
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::survivor_counts_serial(cross, {0.0, 0.0}, kHorizons, 0, n, 7, policy));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SurvivorsOpenMP(benchmark::State& state) {
    const Domain cross = Domain::cross();
    const StepPolicy policy;
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::survivor_counts_openmp(cross, {0.0, 0.0}, kHorizons, 0, n, 7, policy));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SurvivorsSerial)->Arg(1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SurvivorsOpenMP)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
