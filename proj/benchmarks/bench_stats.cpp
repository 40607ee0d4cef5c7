#include <benchmark/benchmark.h>

#include "greenevo/analysis.hpp"
#include "greenevo/rng.hpp"

using namespace greenevo;

static void BM_MannWhitneyExact(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = uniform01(rng);
        b[i] = uniform01(rng) + 0.2;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(mann_whitney_u(a, b, MannWhitneyMode::exact));
    }
}
BENCHMARK(BM_MannWhitneyExact)->Arg(5)->Arg(8)->Arg(10);

static void BM_KruskalWallis(benchmark::State& state)
{
    Rng rng(7);
    std::vector<SampleGroup> groups(6);
    for (auto& g : groups) {
        for (int i = 0; i < 150; ++i) {
            g.values.push_back(uniform01(rng));
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(kruskal_wallis(groups));
    }
}
BENCHMARK(BM_KruskalWallis);
