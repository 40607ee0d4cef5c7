#include <doctest.h>

#include <set>

#include "builders.hpp"
#include "greenevo/error.hpp"
#include "greenevo/genome.hpp"

using namespace greenevo;

TEST_CASE("init_individual respects the initial layer range")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.init_min_layers = 2;
    cfg.init_max_layers = 3;
    Rng rng(1);
    std::set<std::size_t> sizes;
    for (int i = 0; i < 1000; ++i) {
        const auto ind = init_individual(g, cfg, rng, static_cast<std::uint64_t>(i));
        CHECK(ind.id == static_cast<std::uint64_t>(i));
        CHECK(ind.train_budget == cfg.initial_train_budget);
        CHECK_FALSE(ind.evaluation.has_value());
        for (const auto& m : ind.modules) {
            CHECK(m.layers.size() >= 2);
            CHECK(m.layers.size() <= 3);
            sizes.insert(m.layers.size());
        }
        CHECK(check_invariants(ind, g).empty());
        CHECK(count_hidden_layers(ind, g) >= 2);
        CHECK(ind.macro.middle_point <= count_hidden_layers(ind, g) - 2);
    }
    CHECK(sizes == std::set<std::size_t>{2, 3});
}

TEST_CASE("init_individual: population of five, several modules")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.init_min_modules = 1;
    cfg.init_max_modules = 3;
    Rng rng(2);
    std::vector<Individual> population;
    for (std::uint64_t i = 0; i < 5; ++i) {
        population.push_back(init_individual(g, cfg, rng, i));
    }
    CHECK(population.size() == 5);
    for (const auto& ind : population) {
        CHECK(check_invariants(ind, g).empty());
        CHECK(ind.modules.size() >= 1);
        CHECK(ind.modules.size() <= 3);
    }
}

TEST_CASE("genome config validation")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.min_layers = 3;
    cfg.max_layers = 2;
    Rng rng(1);
    CHECK_THROWS_AS(init_individual(g, cfg, rng), ConfigError);
    cfg = {};
    cfg.init_max_layers = 9;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.initial_train_budget = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("count_hidden_layers counts dense layers only")
{
    const auto g = build::default_grammar();
    using build::dense;
    using build::dropout;
    CHECK(count_hidden_layers(build::individual({build::module({dense(8), dense(9), dense(10)})}), g) == 3);
    CHECK(count_hidden_layers(build::individual({build::module({dense(8), dropout(0.2), dense(10)})}), g) == 2);
    CHECK(count_hidden_layers(build::individual({build::module({dense(8), dense(9)}), build::module({dense(8), dense(9)})}), g) == 4);
}

TEST_CASE("clamp_middle_point")
{
    const auto g = build::default_grammar();
    using build::dense;
    const auto four = build::module({dense(8), dense(8), dense(8), dense(8)});
    CHECK(clamp_middle_point(build::individual({four}, 7), g).macro.middle_point == 2);
    CHECK(clamp_middle_point(build::individual({four}, 0), g).macro.middle_point == 0);
    const auto five = build::module({dense(8), dense(8), dense(8), dense(8), dense(8)});
    CHECK(clamp_middle_point(build::individual({five}, 1), g).macro.middle_point == 1);
    CHECK(clamp_middle_point(build::individual({four}, -3), g).macro.middle_point == 0);
}

TEST_CASE("to_phenotype")
{
    const auto g = build::default_grammar();
    using build::dense;
    using build::dropout;

    SUBCASE("modules concatenate in order")
    {
        const auto ind = build::individual(
            {build::module({dense(10, 0), dense(20, 1)}), build::module({dense(30, 0), dense(40, 1)})}, 1, 0.01, 64);
        const auto spec = to_phenotype(ind, g);
        REQUIRE(spec.layers.size() == 4);
        CHECK(spec.dense_count() == 4);
        CHECK(spec.layers[0].units == 10);
        CHECK(spec.layers[1].activation == Activation::sigmoid);
        CHECK(spec.layers[3].units == 40);
        CHECK(spec.aux_index == 1);
        CHECK(spec.hyperparams.learning_rate == 0.01);
        CHECK(spec.hyperparams.batch_size == 64);
    }
    SUBCASE("dropout carries its rate")
    {
        const auto spec = to_phenotype(build::individual({build::module({dense(10), dropout(0.3), dense(9)})}), g);
        CHECK(spec.layers[1].kind == LayerKind::dropout);
        CHECK(spec.layers[1].rate == 0.3);
        CHECK(spec.dense_count() == 2);
    }
    SUBCASE("decoded learning rate stays in its block")
    {
        GenomeConfig cfg;
        Rng rng(3);
        for (int i = 0; i < 500; ++i) {
            const auto spec = to_phenotype(init_individual(g, cfg, rng), g);
            CHECK(spec.hyperparams.learning_rate >= 0.0001);
            CHECK(spec.hyperparams.learning_rate < 0.1);
            CHECK(spec.hyperparams.batch_size >= 16);
            CHECK(spec.hyperparams.batch_size <= 128);
        }
    }
    SUBCASE("invalid genotypes are rejected")
    {
        CHECK_THROWS_AS(to_phenotype(build::individual({build::module({dense(10)})}), g), InvalidGenotype);
        CHECK_THROWS_AS(to_phenotype(build::individual({build::module({dense(10), dense(10)})}, 1), g), InvalidGenotype);
    }
    SUBCASE("pure")
    {
        const auto ind = build::individual({build::module({dense(10), dense(12), dense(14)})}, 1);
        CHECK(to_phenotype(ind, g) == to_phenotype(ind, g));
    }
}

TEST_CASE("property: partition point leaves both partitions nonempty")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.init_max_modules = 3;
    cfg.init_min_layers = 1;
    cfg.init_max_layers = 5;
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const auto spec = to_phenotype(init_individual(g, cfg, rng), g);
        const int h = spec.dense_count();
        // right = dense 0..aux_index, left additionally has aux_index+1..h-1
        CHECK(spec.aux_index >= 0);
        CHECK(spec.aux_index + 1 < h);
    }
}

TEST_CASE("check_invariants reports problems")
{
    const auto g = build::default_grammar();
    using build::dense;
    CHECK_FALSE(check_invariants(build::individual({build::module({dense(10)})}), g).empty());
    CHECK_FALSE(check_invariants(build::individual({}), g).empty());
    auto tight = build::module({dense(10), dense(10), dense(10)}, 1, 2);
    CHECK_FALSE(check_invariants(build::individual({tight}), g).empty());
    CHECK(check_invariants(build::individual({build::module({dense(10), dense(10)})}), g).empty());
}
