#include <benchmark/benchmark.h>

#include "greenevo/genome.hpp"
#include "greenevo/grammar.hpp"
#include "greenevo/mutation.hpp"

using namespace greenevo;

static void BM_DeriveAndDecode(benchmark::State& state)
{
    const auto g = parse_grammar(default_grammar_text());
    Rng rng(4);
    for (auto _ : state) {
        const auto genes = random_derivation(g, "layer", rng);
        benchmark::DoNotOptimize(decode(g, "layer", genes));
    }
}
BENCHMARK(BM_DeriveAndDecode);

static void BM_Mutate(benchmark::State& state)
{
    const auto g = parse_grammar(default_grammar_text());
    GenomeConfig cfg;
    ModuleArchive archive;
    Rng rng(5);
    auto ind = init_individual(g, cfg, rng);
    archive.insert(ind.modules.front(), 50.0);
    const MutationContext ctx{g, cfg, MutationRates{}, &archive, [](const ModuleGene&) { return 50.0; }, true, 1, 100};
    for (auto _ : state) {
        benchmark::DoNotOptimize(mutate(ind, ctx, rng));
    }
}
BENCHMARK(BM_Mutate);
