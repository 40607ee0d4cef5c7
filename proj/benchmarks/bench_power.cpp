#include <benchmark/benchmark.h>

#include "greenevo/power.hpp"

using namespace greenevo;

static void BM_ProbeModule(benchmark::State& state)
{
    const auto g = parse_grammar(default_grammar_text());
    GeneList wide;
    wide.expansions["layer"] = {0};
    wide.expansions["dense"] = {0};
    wide.expansions["activation"] = {0};
    wide.values["units"] = {128};
    const ModuleGene module{"layer", {wide, wide}, 1, 5};
    const auto meters = make_meter_factory({});
    for (auto _ : state) {
        benchmark::DoNotOptimize(probe_module_power(module, g, *meters, {}, static_cast<int>(state.range(0)), 1));
    }
}
BENCHMARK(BM_ProbeModule)->Arg(1)->Arg(30);
