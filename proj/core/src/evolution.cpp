#include "greenevo/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "greenevo/error.hpp"
#include "greenevo/network.hpp"
#include "greenevo/serialize.hpp"
#include "json_io.hpp"

namespace greenevo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream tags in the per-individual seed path (run, generation, slot, tag).
enum : std::uint64_t { kInitStream = 0, kEvalStream = 1, kMutateStream = 2, kProbeStream = 3 };

constexpr const char* kCheckpointDir = "checkpoints";

std::uint64_t stream_seed(const EvolutionConfig& cfg, int run, int generation, std::size_t slot, std::uint64_t tag)
{
    return derive_seed(cfg.seed, {static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(generation),
                                  static_cast<std::uint64_t>(slot), tag});
}

struct Trained {
    NetworkF net;
    TrainReport report;
};

Trained build_and_train(const Individual& ind, const Grammar& grammar, const Splits& data, const EvolutionConfig& cfg,
                        std::uint64_t seed)
{
    const auto spec = to_phenotype(ind, grammar);
    Rng rng(seed);
    Trained t{build_network<float>(spec, data.train.dims, data.train.class_count, rng), {}};
    t.report = train(t.net, data.train, ind.train_budget, spec.hyperparams, rng, {cfg.aux_weight});
    return t;
}

EvaluationRecord evaluate_guarded(const Individual& ind, const Grammar& grammar, const Splits& data,
                                  const MeterFactory& meters, const EvolutionConfig& cfg, const FitnessConfig& fitness,
                                  std::uint64_t seed, std::mutex* meter_lock)
{
    const auto started = std::chrono::steady_clock::now();
    EvaluationRecord rec;
    rec.seed = seed;
    try {
        auto trained = build_and_train(ind, grammar, data, cfg, seed);
        rec.epochs_run = trained.report.epochs_run;
        rec.final_loss = trained.report.final_loss;
        if (trained.report.diverged) {
            throw std::runtime_error("training diverged");
        }
        const auto [left, right] = split(trained.net);
        rec.partitions.acc_left = evaluate_accuracy(left, data.validation);
        rec.partitions.acc_right = evaluate_accuracy(right, data.validation);

        const auto& val = data.validation;
        const std::size_t n = cfg.meter.inference_samples == 0 ? val.size()
                                                                : std::min(cfg.meter.inference_samples, val.size());
        const Eigen::MatrixXf input = val.matrix().leftCols(static_cast<Eigen::Index>(n));
        const auto measure = [&](const NetworkF& part, std::uint64_t tag) {
            auto meter = meters.create({mac_count(part), n}, derive_seed(seed, {tag}));
            std::unique_lock<std::mutex> lock;
            if (meter_lock != nullptr && meters.exclusive()) {
                lock = std::unique_lock<std::mutex>(*meter_lock);
            }
            return measure_mean(*meter, [&] { return forward<float>(part, input).main(0, 0); }, cfg.meter.n_measures)
                .mean_watts;
        };
        rec.partitions.power_left = measure(left, 1);
        rec.partitions.power_right = measure(right, 2);
        rec.fitness = compute_fitness(fitness, rec.partitions.acc_left, rec.partitions.acc_right,
                                      rec.partitions.power_left);
    } catch (const std::exception& e) {
        rec.partitions = {};
        rec.fitness = FitnessValue::worst();
        rec.failed = true;
        rec.failure = e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rec;
}

template <class F>
void parallel_for(std::size_t count, int workers, F&& body)
{
    const auto threads = static_cast<std::size_t>(std::max(1, std::min<int>(workers, static_cast<int>(count))));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                body(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

std::string fingerprint(const EvolutionConfig& cfg, ExperimentMode mode)
{
    const auto& r = cfg.rates;
    const auto& g = cfg.genome;
    const auto& m = cfg.meter;
    json j{{"mode", std::string(to_string(mode))},
           {"population_size", cfg.population_size},
           {"rates", {r.add_layer, r.reuse_layer, r.remove_layer, r.reuse_module, r.remove_module, r.dsge_level,
                      r.macro_layer, r.train_longer}},
           {"genome", {g.module_symbol, g.min_layers, g.max_layers, g.init_min_layers, g.init_max_layers,
                       g.init_min_modules, g.init_max_modules, g.max_modules, g.macro_symbols, g.middle_point_symbol,
                       g.initial_train_budget}},
           {"train", {cfg.train_longer_increment, cfg.max_epochs, cfg.aux_weight}},
           {"archive", {cfg.archive_capacity, cfg.probe_batch}},
           {"fitness", {std::string(to_string(cfg.fitness.kind)), cfg.fitness.threshold_left,
                        cfg.fitness.threshold_right, cfg.fitness.power_weight}},
           {"meter", {static_cast<int>(m.kind), m.analytic.p_min, m.analytic.p_max, m.analytic.k, m.analytic.noise_sigma,
                      m.analytic.seed, m.n_measures, m.inference_samples}},
           {"seed", cfg.seed}};
    json script = json::array();
    for (const auto& e : m.script) {
        script.push_back({e.millijoules, e.seconds});
    }
    j["script"] = std::move(script);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

std::string checkpoint_name(int generation)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "gen_%06d.json", generation);
    return buf;
}

struct RunState {
    int generation = -1;
    std::uint64_t next_id = 0;
    long evaluations = 0;
    ModuleArchive archive;
    std::vector<GenerationLog> logs;
};

json state_to_json(const RunState& s, int run, const std::string& print)
{
    json logs = json::array();
    for (const auto& log : s.logs) {
        json pop = json::array();
        for (const auto& ind : log.population) {
            pop.push_back(json_io::to_json(ind));
        }
        logs.push_back({{"generation", log.generation}, {"best_id", log.best_id}, {"population", std::move(pop)}});
    }
    return {{"run", run},
            {"fingerprint", print},
            {"generation", s.generation},
            {"next_id", s.next_id},
            {"evaluations", s.evaluations},
            {"archive", json_io::to_json(s.archive)},
            {"logs", std::move(logs)}};
}

RunState state_from_json(const json& j, int run, const std::string& print)
{
    if (j.at("run").get<int>() != run) {
        throw CheckpointError("checkpoint belongs to another run");
    }
    if (j.at("fingerprint").get<std::string>() != print) {
        throw CheckpointError("checkpoint was written with a different configuration");
    }
    RunState s;
    s.generation = j.at("generation").get<int>();
    s.next_id = j.at("next_id").get<std::uint64_t>();
    s.evaluations = j.at("evaluations").get<long>();
    s.archive = json_io::archive_from(j.at("archive"));
    for (const auto& l : j.at("logs")) {
        GenerationLog log;
        log.generation = l.at("generation").get<int>();
        log.best_id = l.at("best_id").get<std::uint64_t>();
        for (const auto& ind : l.at("population")) {
            log.population.push_back(json_io::individual_from(ind));
        }
        s.logs.push_back(std::move(log));
    }
    if (s.logs.empty() || s.logs.back().generation != s.generation) {
        throw CheckpointError("checkpoint logs are inconsistent");
    }
    return s;
}

std::optional<RunState> load_latest_checkpoint(const std::string& directory, int run, const std::string& print)
{
    const fs::path dir = fs::path(directory) / kCheckpointDir;
    if (!fs::is_directory(dir)) {
        return std::nullopt;
    }
    std::optional<fs::path> latest;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("gen_", 0) == 0 && entry.path().extension() == ".json" && (!latest || entry.path() > *latest)) {
            latest = entry.path();
        }
    }
    if (!latest) {
        return std::nullopt;
    }
    const auto payload = unwrap_checkpoint(read_text_file(latest->string()));
    try {
        return state_from_json(json::parse(payload), run, print);
    } catch (const json::exception& e) {
        throw CheckpointError(latest->string() + ": " + e.what());
    }
}

const Individual& find_by_id(const GenerationLog& log)
{
    for (const auto& ind : log.population) {
        if (ind.id == log.best_id) {
            return ind;
        }
    }
    throw CheckpointError("best individual missing from its generation");
}

std::string csv_line_header()
{
    return std::string(generation_csv_header()) + "\n";
}

} // namespace

std::string_view to_string(ExperimentMode mode) noexcept
{
    return mode == ExperimentMode::baseline ? "baseline" : "proposed";
}

ExperimentMode parse_experiment_mode(std::string_view text)
{
    if (text == "baseline") {
        return ExperimentMode::baseline;
    }
    if (text == "proposed") {
        return ExperimentMode::proposed;
    }
    throw ConfigError("mode must be baseline or proposed, got '" + std::string(text) + "'");
}

void EvolutionConfig::validate() const
{
    if (runs < 1) {
        throw ConfigError("evolution.runs must be >= 1");
    }
    if (generations < 1) {
        throw ConfigError("evolution.generations must be >= 1");
    }
    if (population_size < 2) {
        throw ConfigError("evolution.population_size must be >= 2");
    }
    if (train_longer_increment < 1) {
        throw ConfigError("evolution.train_longer_increment must be >= 1");
    }
    if (max_epochs < genome.initial_train_budget) {
        throw ConfigError("evolution.max_epochs must be >= genome.initial_train_budget");
    }
    if (!(aux_weight >= 0.0) || !std::isfinite(aux_weight)) {
        throw ConfigError("evolution.aux_weight must be finite and non-negative");
    }
    if (archive_capacity < 1) {
        throw ConfigError("evolution.archive_capacity must be >= 1");
    }
    if (probe_batch < 1) {
        throw ConfigError("evolution.probe_batch must be >= 1");
    }
    if (workers < 1) {
        throw ConfigError("workers must be >= 1");
    }
    rates.validate();
    genome.validate();
    fitness.validate();
    meter.validate();
}

long expected_evaluations(const EvolutionConfig& cfg) noexcept
{
    return static_cast<long>(cfg.population_size) + static_cast<long>(cfg.lambda()) * cfg.generations;
}

EvaluationRecord evaluate_individual(const Individual& ind, const Grammar& grammar, const Splits& data,
                                     const MeterFactory& meters, const EvolutionConfig& cfg,
                                     const FitnessConfig& fitness, std::uint64_t seed)
{
    return evaluate_guarded(ind, grammar, data, meters, cfg, fitness, seed, nullptr);
}

std::size_t select_parent(const std::vector<Individual>& population)
{
    if (population.empty()) {
        throw std::invalid_argument("select_parent: empty population");
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (!population[i].evaluation) {
            throw std::invalid_argument("select_parent: unevaluated individual");
        }
        if (i == 0) {
            continue;
        }
        const auto& a = *population[i].evaluation;
        const auto& b = *population[best].evaluation;
        const bool better = a.fitness != b.fitness ? a.fitness > b.fitness
                            : a.partitions.power_left != b.partitions.power_left
                                ? a.partitions.power_left < b.partitions.power_left
                                : population[i].id < population[best].id;
        if (better) {
            best = i;
        }
    }
    return best;
}

FitnessConfig mode_fitness(const EvolutionConfig& cfg, ExperimentMode mode)
{
    FitnessConfig f = cfg.fitness;
    if (mode == ExperimentMode::baseline) {
        f.kind = FitnessKind::accuracy;
    }
    return f;
}

RunResult run_es(const EvolutionConfig& cfg, ExperimentMode mode, const Grammar& grammar, const Splits& data,
                 const MeterFactory& meters, int run_index, const RunOptions& options)
{
    cfg.validate();
    data.train.validate();
    data.validation.validate();
    if (data.train.empty() || data.validation.empty()) {
        throw DataError("training and validation splits must be non-empty");
    }
    const FitnessConfig fitness = mode_fitness(cfg, mode);
    const bool proposed = mode == ExperimentMode::proposed;
    const std::string print = fingerprint(cfg, mode);
    const IoShape io{data.train.dims, data.train.class_count};
    std::mutex meter_lock;

    const auto probe = [&](const ModuleGene& module, std::uint64_t seed) {
        return probe_module_power(module, grammar, meters, io, cfg.meter.n_measures, seed, cfg.probe_batch).watts;
    };
    const auto evaluate_all = [&](std::vector<Individual>& pop, int generation, std::size_t first, RunState& state) {
        parallel_for(pop.size() - first, cfg.workers, [&](std::size_t k) {
            const std::size_t slot = first + k;
            pop[slot].evaluation = evaluate_guarded(pop[slot], grammar, data, meters, cfg, fitness,
                                                    stream_seed(cfg, run_index, generation, slot, kEvalStream),
                                                    &meter_lock);
        });
        state.evaluations += static_cast<long>(pop.size() - first);
    };
    const auto checkpoint = [&](const RunState& state) {
        if (options.directory.empty()) {
            return;
        }
        const auto path = fs::path(options.directory) / kCheckpointDir / checkpoint_name(state.generation);
        write_text_file(path.string(), wrap_checkpoint(state_to_json(state, run_index, print).dump()));
    };
    const auto finish_generation = [&](RunState& state, int generation, std::vector<Individual> pop) {
        GenerationLog log;
        log.generation = generation;
        log.best_id = pop[select_parent(pop)].id;
        log.population = std::move(pop);
        state.generation = generation;
        state.logs.push_back(std::move(log));
        checkpoint(state);
        if (options.on_generation) {
            options.on_generation(state.logs.back());
        }
    };

    RunState state{-1, 0, 0, ModuleArchive(cfg.archive_capacity), {}};
    if (options.resume && !options.directory.empty()) {
        if (auto loaded = load_latest_checkpoint(options.directory, run_index, print)) {
            state = std::move(*loaded);
            if (state.generation > cfg.generations) {
                throw CheckpointError("checkpoint is past the configured number of generations");
            }
        }
    }

    if (state.generation < 0) {
        std::vector<Individual> pop;
        for (int slot = 0; slot < cfg.population_size; ++slot) {
            Rng rng(stream_seed(cfg, run_index, 0, static_cast<std::size_t>(slot), kInitStream));
            pop.push_back(init_individual(grammar, cfg.genome, rng, state.next_id++));
        }
        evaluate_all(pop, 0, 0, state);
        if (proposed) {
            for (std::size_t slot = 0; slot < pop.size(); ++slot) {
                for (std::size_t m = 0; m < pop[slot].modules.size(); ++m) {
                    const auto seed = derive_seed(stream_seed(cfg, run_index, 0, slot, kProbeStream), {m});
                    state.archive.insert(pop[slot].modules[m], probe(pop[slot].modules[m], seed));
                }
            }
        }
        finish_generation(state, 0, std::move(pop));
    }

    for (int g = state.generation + 1; g <= cfg.generations; ++g) {
        const Individual parent = find_by_id(state.logs.back());
        std::vector<Individual> pop{parent};
        for (int slot = 1; slot <= cfg.lambda(); ++slot) {
            const auto slot_index = static_cast<std::size_t>(slot);
            std::uint64_t probes = 0;
            MutationContext ctx{grammar, cfg.genome, cfg.rates, proposed ? &state.archive : nullptr, {}, proposed,
                                cfg.train_longer_increment, cfg.max_epochs};
            if (proposed) {
                ctx.probe = [&](const ModuleGene& module) {
                    return probe(module, derive_seed(stream_seed(cfg, run_index, g, slot_index, kProbeStream), {probes++}));
                };
            }
            Rng rng(stream_seed(cfg, run_index, g, slot_index, kMutateStream));
            Individual child = mutate(parent, ctx, rng);
            child.id = state.next_id++;
            pop.push_back(std::move(child));
        }
        evaluate_all(pop, g, 1, state);
        finish_generation(state, g, std::move(pop));
    }

    RunResult result;
    result.run = run_index;
    result.generations = std::move(state.logs);
    result.best = find_by_id(result.generations.back());
    result.archive = std::move(state.archive);
    result.evaluations = state.evaluations;
    return result;
}

std::vector<GenerationRow> generation_rows(const RunResult& run, const Grammar& grammar)
{
    std::vector<GenerationRow> rows;
    for (const auto& log : run.generations) {
        for (const auto& ind : log.population) {
            rows.push_back(make_generation_row(run.run, log.generation, ind, grammar));
        }
    }
    return rows;
}

void write_best_weights(const Individual& ind, const Grammar& grammar, const Splits& data, const EvolutionConfig& cfg,
                        const std::string& path)
{
    if (!ind.evaluation) {
        throw std::invalid_argument("write_best_weights: individual was never evaluated");
    }
    const auto trained = build_and_train(ind, grammar, data, cfg, ind.evaluation->seed);
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    write_weights(trained.net, path);
}

ExperimentResult run_experiment(const EvolutionConfig& cfg, ExperimentMode mode, const Grammar& grammar,
                                const Splits& data, const std::string& directory, bool resume)
{
    cfg.validate();
    const auto meters = make_meter_factory(cfg.meter);
    const fs::path root(directory);
    fs::create_directories(root);

    ExperimentResult out;
    std::string final_csv = csv_line_header();
    for (int r = 0; r < cfg.runs; ++r) {
        const fs::path run_dir = root / ("run_" + std::to_string(r));
        RunOptions options;
        options.directory = run_dir.string();
        options.resume = resume;
        auto run = run_es(cfg, mode, grammar, data, *meters, r, options);

        const auto rows = generation_rows(run, grammar);
        write_text_file((run_dir / "generations.csv").string(), format_generation_csv(rows));
        write_text_file((run_dir / "best_genotype.json").string(), individual_document(run.best));
        write_best_weights(run.best, grammar, data, cfg, (run_dir / "best_weights.bin").string());
        if (mode == ExperimentMode::proposed) {
            write_text_file((run_dir / "archive.json").string(), archive_document(run.archive));
        }
        final_csv += format_generation_row(make_generation_row(r, run.generations.back().generation, run.best, grammar));
        final_csv += "\n";
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
        out.runs.push_back(std::move(run));
    }
    write_text_file((root / "generations.csv").string(), format_generation_csv(out.rows));
    write_text_file((root / "final_best.csv").string(), final_csv);
    return out;
}

} // namespace greenevo
