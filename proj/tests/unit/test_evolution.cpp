#include <doctest.h>

#include <filesystem>

#include "builders.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "greenevo/error.hpp"
#include "greenevo/evolution.hpp"
#include "greenevo/network.hpp"
#include "greenevo/serialize.hpp"

using namespace greenevo;
namespace fs = std::filesystem;

namespace {

Individual with_eval(std::uint64_t id, double fitness, double power)
{
    Individual ind;
    ind.id = id;
    EvaluationRecord rec;
    rec.fitness = {fitness};
    rec.partitions.power_left = power;
    ind.evaluation = rec;
    return ind;
}

std::vector<GenerationRow> all_rows(const ExperimentResult& r)
{
    return r.rows;
}

} // namespace

TEST_CASE("evaluation accounting")
{
    EvolutionConfig cfg;
    CHECK(cfg.lambda() == 4);
    CHECK(expected_evaluations(cfg) == 5 + 4 * 150);
    cfg.generations = 30;
    CHECK(expected_evaluations(cfg) == 125);
}

TEST_CASE("config validation")
{
    EvolutionConfig cfg;
    cfg.population_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.generations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_epochs = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(parse_experiment_mode("baseline") == ExperimentMode::baseline);
    CHECK_THROWS_AS(parse_experiment_mode("other"), ConfigError);
}

TEST_CASE("select_parent")
{
    CHECK(select_parent({with_eval(0, 1.2, 50), with_eval(1, 1.9, 50), with_eval(2, 1.5, 50)}) == 1);
    CHECK(select_parent({with_eval(0, 1.0, 70), with_eval(1, 1.0, 60)}) == 1);
    CHECK(select_parent({with_eval(5, 1.0, 60), with_eval(3, 1.0, 60)}) == 1);
    CHECK(select_parent({with_eval(9, 0.3, 60)}) == 0);
    CHECK(select_parent({with_eval(0, -std::numeric_limits<double>::infinity(), 0), with_eval(1, 0.0, 99)}) == 1);
    CHECK_THROWS(select_parent({}));
    CHECK_THROWS(select_parent({Individual{}}));
}

TEST_CASE("mode settings")
{
    EvolutionConfig cfg;
    CHECK(mode_fitness(cfg, ExperimentMode::proposed).kind == FitnessKind::f3);
    CHECK(mode_fitness(cfg, ExperimentMode::baseline).kind == FitnessKind::accuracy);
}

TEST_CASE("evaluate_individual")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    auto cfg = fixture::small_config();
    const auto meters = make_meter_factory(cfg.meter);
    const auto ind = build::individual({build::module({build::dense(12), build::dense(9), build::dense(8)})}, 1);

    const auto a = evaluate_individual(ind, g, data, *meters, cfg, cfg.fitness, 42);
    const auto b = evaluate_individual(ind, g, data, *meters, cfg, cfg.fitness, 42);
    REQUIRE_FALSE(a.failed);
    CHECK(a.fitness == b.fitness);
    CHECK(a.partitions.acc_left == b.partitions.acc_left);
    CHECK(a.partitions.power_left == b.partitions.power_left);
    CHECK(a.seed == 42);
    CHECK(a.epochs_run == ind.train_budget);

    SUBCASE("power is the inference cost of each partition")
    {
        const std::uint64_t left = 8 * 12 + 12 * 9 + 9 * 8 + 8 * 3;
        const std::uint64_t right = 8 * 12 + 12 * 9 + 9 * 3;
        CHECK(a.partitions.power_left == doctest::Approx(analytic_power(left, cfg.meter.analytic)).epsilon(1e-12));
        CHECK(a.partitions.power_right == doctest::Approx(analytic_power(right, cfg.meter.analytic)).epsilon(1e-12));
        CHECK(a.fitness.value == doctest::Approx(compute_fitness(cfg.fitness, a.partitions.acc_left, a.partitions.acc_right,
                                                                 a.partitions.power_left)
                                                     .value)
                                     .epsilon(1e-12));
    }
    SUBCASE("the meter sees validation inference batches")
    {
        struct Recording final : MeterFactory {
            mutable std::vector<Workload> seen;
            std::unique_ptr<Meter> create(const Workload& w, std::uint64_t) const override
            {
                seen.push_back(w);
                return std::make_unique<ScriptedMeter>(std::vector<EnergyReading>{{5000.0, 0.5}});
            }
        } recording;
        const auto rec = evaluate_individual(ind, g, data, recording, cfg, cfg.fitness, 1);
        REQUIRE(recording.seen.size() == 2);
        CHECK(recording.seen[0].samples_per_call == 16);
        CHECK(rec.partitions.power_left == 10.0);
    }
    SUBCASE("failures map to the worst fitness")
    {
        const auto bad = build::individual({build::module({build::dense(12)})});
        const auto rec = evaluate_individual(bad, g, data, *meters, cfg, cfg.fitness, 1);
        CHECK(rec.failed);
        CHECK(rec.fitness.is_worst());
        CHECK_FALSE(rec.failure.empty());

        const auto wild = parse_grammar("<layer> ::= <dense>\n<dense> ::= layer:dense [units,int,1,4,8] act:relu\n"
                                        "<learning> ::= [lr,float,1,1e12,1e13] [batch_size,int,1,4,4]\n"
                                        "<middle_point> ::= [middle_point,int,1,0,x]\n");
        Individual diverging;
        GeneList layer;
        layer.expansions["layer"] = {0};
        layer.expansions["dense"] = {0};
        layer.values["units"] = {8};
        diverging.modules.push_back({"layer", {layer, layer}, 1, 4});
        diverging.macro.genes["learning"].expansions["learning"] = {0};
        diverging.macro.genes["learning"].values["lr"] = {5e12};
        diverging.macro.genes["learning"].values["batch_size"] = {4};
        diverging.train_budget = 20;
        const auto div = evaluate_individual(diverging, wild, data, *meters, cfg, cfg.fitness, 1);
        CHECK(div.failed);
        CHECK(div.fitness.is_worst());
    }
}

TEST_CASE("run_es: accounting, elitism, slot 0 carries the parent")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    auto cfg = fixture::small_config();
    cfg.generations = 4;
    const auto meters = make_meter_factory(cfg.meter);
    for (auto mode : {ExperimentMode::baseline, ExperimentMode::proposed}) {
        const auto run = run_es(cfg, mode, g, data, *meters, 0);
        CHECK(run.evaluations == expected_evaluations(cfg));
        REQUIRE(run.generations.size() == 5);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < run.generations.size(); ++k) {
            const auto& log = run.generations[k];
            CHECK(log.population.size() == 5);
            const auto& winner = log.population[select_parent(log.population)];
            CHECK(winner.id == log.best_id);
            CHECK(winner.evaluation->fitness.value >= best);
            best = winner.evaluation->fitness.value;
            if (k > 0) {
                const auto& prev = run.generations[k - 1];
                const auto& parent = prev.population[select_parent(prev.population)];
                CHECK(log.population[0].id == parent.id);
                CHECK(log.population[0].evaluation->fitness == parent.evaluation->fitness);
            }
            for (const auto& ind : log.population) {
                CHECK(check_invariants(ind, g).empty());
            }
        }
        if (mode == ExperimentMode::baseline) {
            CHECK(run.archive.empty());
        } else {
            CHECK_FALSE(run.archive.empty());
        }
    }
}

TEST_CASE("run_es: zero mutation rates keep the population constant")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    auto cfg = fixture::small_config();
    cfg.rates = MutationRates::none();
    const auto meters = make_meter_factory(cfg.meter);
    const auto run = run_es(cfg, ExperimentMode::proposed, g, data, *meters, 0);
    const auto& first = run.generations[0];
    const auto parent = first.population[select_parent(first.population)];
    for (std::size_t k = 1; k < run.generations.size(); ++k) {
        for (const auto& ind : run.generations[k].population) {
            CHECK(same_genotype(ind, parent));
        }
        const auto& log = run.generations[k];
        CHECK(log.population[select_parent(log.population)].evaluation->fitness >= parent.evaluation->fitness);
    }
}

TEST_CASE("run_es: baseline mode never changes the module count")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    auto cfg = fixture::small_config();
    cfg.rates = MutationRates::none();
    cfg.rates.reuse_module = 1.0;
    cfg.rates.remove_module = 0.5;
    cfg.genome.max_modules = 3;
    const auto meters = make_meter_factory(cfg.meter);
    const auto run = run_es(cfg, ExperimentMode::baseline, g, data, *meters, 0);
    for (const auto& log : run.generations) {
        for (const auto& ind : log.population) {
            CHECK(ind.modules.size() == 1);
        }
    }
    const auto prop = run_es(cfg, ExperimentMode::proposed, g, data, *meters, 0);
    bool changed = false;
    for (const auto& log : prop.generations) {
        for (const auto& ind : log.population) {
            changed = changed || ind.modules.size() != 1;
        }
    }
    CHECK(changed);
}

TEST_CASE("run_es: results do not depend on the worker count")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    auto cfg = fixture::small_config();
    const auto meters = make_meter_factory(cfg.meter);
    const auto one = generation_rows(run_es(cfg, ExperimentMode::proposed, g, data, *meters, 1), g);
    cfg.workers = 4;
    const auto four = generation_rows(run_es(cfg, ExperimentMode::proposed, g, data, *meters, 1), g);
    CHECK(one == four);
}

TEST_CASE("run_es: interrupted and resumed runs match uninterrupted ones")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    auto cfg = fixture::small_config();
    cfg.generations = 5;
    const auto meters = make_meter_factory(cfg.meter);
    const auto full = run_es(cfg, ExperimentMode::proposed, g, data, *meters, 0);

    oracle::TempDir dir("greenevo_resume");
    RunOptions options;
    options.directory = dir.path().string();
    auto partial_cfg = cfg;
    partial_cfg.generations = 2;
    run_es(partial_cfg, ExperimentMode::proposed, g, data, *meters, 0, options);
    CHECK(fs::exists(dir.path() / "checkpoints" / "gen_000002.json"));

    options.resume = true;
    int resumed_generations = 0;
    options.on_generation = [&](const GenerationLog&) { ++resumed_generations; };
    const auto resumed = run_es(cfg, ExperimentMode::proposed, g, data, *meters, 0, options);
    CHECK(resumed_generations == 3);
    CHECK(generation_rows(resumed, g) == generation_rows(full, g));
    CHECK(resumed.evaluations == full.evaluations);
    CHECK(archive_document(resumed.archive) == archive_document(full.archive));

    SUBCASE("a corrupt checkpoint is an explicit error")
    {
        const auto latest = dir.path() / "checkpoints" / "gen_000005.json";
        auto text = read_text_file(latest.string());
        text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
        write_text_file(latest.string(), text);
        CHECK_THROWS_AS(run_es(cfg, ExperimentMode::proposed, g, data, *meters, 0, options), CheckpointError);
    }
    SUBCASE("a checkpoint from another configuration is rejected")
    {
        auto other = cfg;
        other.seed = 99;
        CHECK_THROWS_AS(run_es(other, ExperimentMode::proposed, g, data, *meters, 0, options), CheckpointError);
    }
}

TEST_CASE("run_experiment output layout and reproducibility")
{
    const auto g = build::default_grammar();
    const auto data = fixture::small_splits();
    const auto cfg = fixture::small_config();
    oracle::TempDir a("greenevo_exp_a");
    oracle::TempDir b("greenevo_exp_b");
    const auto ra = run_experiment(cfg, ExperimentMode::proposed, g, data, a.path().string());
    const auto rb = run_experiment(cfg, ExperimentMode::proposed, g, data, b.path().string());
    CHECK(ra.runs.size() == 2);
    for (const char* f : {"generations.csv", "final_best.csv"}) {
        CHECK(read_text_file((a.path() / f).string()) == read_text_file((b.path() / f).string()));
    }
    for (int r = 0; r < 2; ++r) {
        const auto run_dir = a.path() / ("run_" + std::to_string(r));
        for (const char* f : {"generations.csv", "best_genotype.json", "best_weights.bin", "archive.json"}) {
            CHECK(fs::exists(run_dir / f));
        }
        CHECK(fs::exists(run_dir / "checkpoints" / "gen_000003.json"));
        const auto best = read_individual_document(read_text_file((run_dir / "best_genotype.json").string()));
        CHECK(best.id == ra.runs[static_cast<std::size_t>(r)].best.id);
    }
    const auto final_rows = parse_generation_csv(read_text_file((a.path() / "final_best.csv").string()));
    REQUIRE(final_rows.size() == 2);
    CHECK(final_rows[1].run == 1);
    CHECK(final_rows[1].generation == 3);
    CHECK(parse_generation_csv(read_text_file((a.path() / "generations.csv").string())) == all_rows(ra));
    CHECK(ra.rows.size() == static_cast<std::size_t>(2 * expected_evaluations(cfg) + 2 * cfg.generations));

    oracle::TempDir base("greenevo_exp_base");
    run_experiment(cfg, ExperimentMode::baseline, g, data, base.path().string());
    CHECK_FALSE(fs::exists(base.path() / "run_0" / "archive.json"));
}
