#include <doctest.h>

#include <cmath>

#include "builders.hpp"
#include "greenevo/error.hpp"
#include "greenevo/mutation.hpp"

using namespace greenevo;

namespace {

ModuleGene module_of(int units)
{
    return build::module({build::dense(units), build::dense(units + 1)});
}

ModuleArchive archive_with(std::vector<double> powers)
{
    ModuleArchive a;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        a.insert(module_of(10 + static_cast<int>(i)), powers[i]);
    }
    return a;
}

MutationRates only(double MutationRates::*field, double p)
{
    auto r = MutationRates::none();
    r.*field = p;
    return r;
}

} // namespace

TEST_CASE("default rates")
{
    const MutationRates r;
    CHECK(r.add_layer == 0.25);
    CHECK(r.reuse_layer == 0.15);
    CHECK(r.remove_layer == 0.25);
    CHECK(r.reuse_module == 0.15);
    CHECK(r.remove_module == 0.25);
    CHECK(r.dsge_level == 0.15);
    CHECK(r.macro_layer == 0.30);
    CHECK(r.train_longer == 0.20);
    auto bad = r;
    bad.add_layer = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("select_archive_module probabilities")
{
    CHECK(archive_with({42, 42, 42, 42}).selection_probabilities() ==
          std::vector<double>{0.25, 0.25, 0.25, 0.25});
    const auto p = archive_with({50, 100}).selection_probabilities();
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(archive_with({77}).selection_probabilities() == std::vector<double>{1.0});

    Rng rng(1);
    CHECK_FALSE(select_archive_module(ModuleArchive{}, rng).has_value());
    const auto single = archive_with({77});
    for (int i = 0; i < 20; ++i) {
        CHECK(*select_archive_module(single, rng) == module_of(10));
    }
}

TEST_CASE("archive_insert")
{
    SUBCASE("duplicate genotype replaces the power")
    {
        auto a = archive_insert(ModuleArchive{}, module_of(10), 40);
        a = archive_insert(a, module_of(10), 35);
        REQUIRE(a.size() == 1);
        CHECK(a.entries()[0].power_watts == 35);
    }
    SUBCASE("at capacity the highest power is evicted")
    {
        ModuleArchive a(2);
        a.insert(module_of(1), 30);
        a.insert(module_of(2), 40);
        a.insert(module_of(3), 35);
        REQUIRE(a.size() == 2);
        CHECK(a.entries()[0].power_watts == 30);
        CHECK(a.entries()[1].power_watts == 35);
        a.insert(module_of(4), 90); // worse than everything held
        CHECK(a.size() == 2);
        CHECK(a.entries()[1].power_watts == 35);
    }
    SUBCASE("empty archive gains one entry; powers are clamped")
    {
        auto a = archive_insert(ModuleArchive{}, module_of(10), 0.0);
        REQUIRE(a.size() == 1);
        CHECK(a.entries()[0].power_watts == kMinArchivePower);
    }
    CHECK_THROWS_AS(ModuleArchive(0), ConfigError);
}

TEST_CASE("property: selection normalisation, monotonicity, scale invariance")
{
    Rng gen(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = 1 + uniform_index(gen, 12);
        std::vector<double> powers;
        for (std::size_t i = 0; i < n; ++i) {
            powers.push_back(uniform_real(gen, 1e-3, 200));
        }
        const auto a = archive_with(powers);
        const auto p = a.selection_probabilities();
        double sum = 0.0;
        for (double v : p) {
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (powers[i] < powers[j]) {
                    CHECK(p[i] > p[j]);
                }
            }
        }
        // Scaling by a power of two is exact, so the draws must coincide.
        std::vector<double> scaled;
        for (double w : powers) {
            scaled.push_back(w * 4.0);
        }
        const auto b = archive_with(scaled);
        Rng r1(trial);
        Rng r2(trial);
        for (int k = 0; k < 50; ++k) {
            CHECK(a.select_index(r1) == b.select_index(r2));
        }
        const double c = uniform_real(gen, 0.1, 10);
        std::vector<double> scaled_c;
        for (double w : powers) {
            scaled_c.push_back(w * c);
        }
        const auto pc = archive_with(scaled_c).selection_probabilities();
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(pc[i] == doctest::Approx(p[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("empirical selection frequencies")
{
    const auto a = archive_with({30, 50, 70, 100});
    const auto p = a.selection_probabilities();
    std::vector<int> counts(4, 0);
    Rng rng(2023);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++counts[*a.select_index(rng)];
    }
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(counts[i] / double(n) - p[i]) <= 0.02);
    }
}

TEST_CASE("mutate: zero rates leave the genotype unchanged")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    Rng rng(3);
    ModuleArchive archive;
    archive.insert(module_of(5), 40);
    for (int i = 0; i < 200; ++i) {
        auto parent = init_individual(g, cfg, rng, 7);
        parent.evaluation = EvaluationRecord{};
        const MutationContext ctx{g, cfg, MutationRates::none(), &archive, {}, true, 1, 100};
        MutationLog log;
        const auto child = mutate(parent, ctx, rng, &log);
        CHECK(same_genotype(child, parent));
        CHECK(child.train_budget == parent.train_budget);
        CHECK_FALSE(child.evaluation.has_value());
        CHECK(log.add_layer + log.remove_layer + log.train_longer + log.macro_layer == 0);
    }
}

TEST_CASE("mutate: remove_layer at min_layers is skipped")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    const auto parent = build::individual({build::module({build::dense(8), build::dense(9)}, 2, 5)});
    const MutationContext ctx{g, cfg, only(&MutationRates::remove_layer, 1.0), nullptr, {}, true, 1, 100};
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        MutationLog log;
        const auto child = mutate(parent, ctx, rng, &log);
        CHECK(child.modules[0].layers.size() == 2);
        CHECK(log.remove_layer == 0);
    }
}

TEST_CASE("mutate: remove_layer never breaks the two-dense-layer floor")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    const auto parent = build::individual({build::module({build::dense(8), build::dropout(0.1), build::dense(9)}, 1, 5)});
    const MutationContext ctx{g, cfg, only(&MutationRates::remove_layer, 1.0), nullptr, {}, true, 1, 100};
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto child = mutate(parent, ctx, rng);
        CHECK(count_hidden_layers(child, g) == 2);
        CHECK(check_invariants(child, g).empty());
    }
}

TEST_CASE("mutate: train_longer adds exactly the increment")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    const auto parent = build::individual({build::module({build::dense(8), build::dense(9)})});
    for (int increment : {1, 2, 5}) {
        const MutationContext ctx{g, cfg, only(&MutationRates::train_longer, 0.5), nullptr, {}, true, increment, 1000};
        Rng rng(static_cast<std::uint64_t>(increment));
        int fired = 0;
        for (int i = 0; i < 400; ++i) {
            MutationLog log;
            const auto child = mutate(parent, ctx, rng, &log);
            CHECK(child.train_budget == parent.train_budget + increment * log.train_longer);
            fired += log.train_longer;
        }
        CHECK(fired > 100);
        CHECK(fired < 300);
    }
    const MutationContext capped{g, cfg, only(&MutationRates::train_longer, 1.0), nullptr, {}, true, 5, 4};
    Rng rng(9);
    CHECK(mutate(parent, capped, rng).train_budget == 4);
}

TEST_CASE("mutate: add and reuse layer respect max_layers")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    auto rates = MutationRates::none();
    rates.add_layer = 1.0;
    rates.reuse_layer = 1.0;
    const MutationContext ctx{g, cfg, rates, nullptr, {}, true, 1, 100};
    Rng rng(4);
    auto ind = build::individual({build::module({build::dense(8), build::dense(9)}, 1, 4)});
    for (int i = 0; i < 10; ++i) {
        ind = mutate(ind, ctx, rng);
        CHECK(ind.modules[0].layers.size() <= 4);
    }
    CHECK(ind.modules[0].layers.size() == 4);
}

TEST_CASE("mutate: reuse_module draws from the archive and probes modified modules")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.max_modules = 3;
    ModuleArchive archive;
    const auto stored = module_of(33);
    archive.insert(stored, 50);
    int probes = 0;
    const ModuleProbe probe = [&](const ModuleGene&) {
        ++probes;
        return 42.0;
    };
    const auto parent = build::individual({build::module({build::dense(8), build::dense(9)})});
    const MutationContext ctx{g, cfg, only(&MutationRates::reuse_module, 1.0), &archive, probe, true, 1, 100};
    Rng rng(5);
    MutationLog log;
    const auto child = mutate(parent, ctx, rng, &log);
    CHECK(log.reuse_module == 1);
    REQUIRE(child.modules.size() == 2);
    CHECK((child.modules[0] == stored || child.modules[1] == stored));
    CHECK(probes == 0); // a reused module is unchanged

    const MutationContext add{g, cfg, only(&MutationRates::add_layer, 1.0), &archive, probe, true, 1, 100};
    mutate(parent, add, rng);
    CHECK(probes == 1);
    CHECK(archive.size() == 2);
}

TEST_CASE("mutate: module operators are gated off in baseline mode")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.max_modules = 3;
    ModuleArchive archive;
    archive.insert(module_of(30), 50);
    auto rates = MutationRates::none();
    rates.reuse_module = 1.0;
    rates.remove_module = 1.0;
    const MutationContext ctx{g, cfg, rates, &archive, {}, false, 1, 100};
    const auto parent = build::individual({module_of(40), module_of(50)});
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        MutationLog log;
        const auto child = mutate(parent, ctx, rng, &log);
        CHECK(log.reuse_module == 0);
        CHECK(log.remove_module == 0);
        CHECK(child.modules.size() == 2);
    }
}

TEST_CASE("mutate: remove_module keeps at least one module")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    const MutationContext ctx{g, cfg, only(&MutationRates::remove_module, 1.0), nullptr, {}, true, 1, 100};
    Rng rng(7);
    auto ind = build::individual({module_of(40), module_of(50), module_of(60)});
    for (int i = 0; i < 5; ++i) {
        ind = mutate(ind, ctx, rng);
    }
    CHECK(ind.modules.size() == 1);
}

TEST_CASE("mutate_genes changes exactly one site and stays decodable")
{
    const auto g = build::default_grammar();
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        const auto genes = random_derivation(g, "learning", rng);
        const auto out = mutate_genes(g, "learning", genes, rng);
        CHECK_NOTHROW(decode(g, "learning", out));
        int changed = 0;
        for (const auto& [name, vals] : genes.values) {
            for (std::size_t k = 0; k < vals.size(); ++k) {
                changed += out.values.at(name)[k] != vals[k];
            }
        }
        CHECK(changed <= 1);
    }
    const auto fixed = parse_grammar("<a> ::= only [v,int,1,3,3]");
    const auto genes = random_derivation(fixed, "a", rng);
    CHECK(mutate_genes(fixed, "a", genes, rng) == genes);
}

TEST_CASE("property: mutation chains preserve every invariant")
{
    const auto g = build::default_grammar();
    GenomeConfig cfg;
    cfg.max_modules = 3;
    cfg.init_max_modules = 2;
    cfg.min_layers = 1;
    cfg.max_layers = 4;
    cfg.init_min_layers = 1;
    cfg.init_max_layers = 4;
    MutationRates rates{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    Rng rng(10);
    int violations = 0;
    for (int chain = 0; chain < 1000; ++chain) {
        ModuleArchive archive(16);
        const ModuleProbe probe = [&](const ModuleGene& m) {
            return 30.0 + static_cast<double>(count_hidden_layers(m, g));
        };
        const MutationContext ctx{g, cfg, rates, &archive, probe, true, 1, 50};
        auto ind = init_individual(g, cfg, rng);
        archive.insert(ind.modules[0], 40);
        for (int step = 0; step < 10; ++step) {
            ind = mutate(ind, ctx, rng);
            const int h = count_hidden_layers(ind, g);
            violations += !check_invariants(ind, g).empty();
            violations += ind.macro.middle_point < 0 || ind.macro.middle_point > h - 2;
            violations += static_cast<int>(ind.modules.size()) > cfg.max_modules;
            violations += archive.size() > archive.capacity();
        }
    }
    CHECK(violations == 0);
}
