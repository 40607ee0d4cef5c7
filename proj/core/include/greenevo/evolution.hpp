#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "greenevo/data.hpp"
#include "greenevo/fitness.hpp"
#include "greenevo/genome.hpp"
#include "greenevo/grammar.hpp"
#include "greenevo/mutation.hpp"
#include "greenevo/power.hpp"
#include "greenevo/results.hpp"

namespace greenevo {

enum class ExperimentMode { baseline, proposed };

std::string_view to_string(ExperimentMode mode) noexcept;
ExperimentMode parse_experiment_mode(std::string_view text);

struct EvolutionConfig {
    int runs = 5;
    int generations = 150;     ///< offspring generations after the initial population
    int population_size = 5;   ///< parent + lambda offspring
    MutationRates rates;
    GenomeConfig genome;       ///< initial_train_budget is the default budget in epochs
    int train_longer_increment = 1;
    int max_epochs = 100;
    double aux_weight = 1.0;
    std::size_t archive_capacity = kDefaultArchiveCapacity;
    std::size_t probe_batch = 32;
    FitnessConfig fitness;
    MeterSettings meter;
    std::uint64_t seed = 0;
    int workers = 1;           ///< concurrent evaluations; results do not depend on it

    int lambda() const noexcept { return population_size - 1; }
    void validate() const;
};

/// population_size + lambda * generations.
long expected_evaluations(const EvolutionConfig& cfg) noexcept;

/// Train, split, score and measure one individual. Never throws for a bad
/// individual: failures come back flagged with the worst fitness.
EvaluationRecord evaluate_individual(const Individual& ind, const Grammar& grammar, const Splits& data,
                                     const MeterFactory& meters, const EvolutionConfig& cfg,
                                     const FitnessConfig& fitness, std::uint64_t seed);

/// Index of the best evaluated individual: highest fitness, then lower
/// power_left, then lower id. Throws std::invalid_argument on an empty or
/// unevaluated population.
std::size_t select_parent(const std::vector<Individual>& population);

struct GenerationLog {
    int generation = 0;
    std::vector<Individual> population; ///< evaluated; slot 0 is the parent carried over
    std::uint64_t best_id = 0;
};

struct RunResult {
    int run = 0;
    std::vector<GenerationLog> generations;
    Individual best;
    ModuleArchive archive;
    long evaluations = 0;
};

struct RunOptions {
    std::string directory;         ///< checkpoints go here when non-empty
    bool resume = false;           ///< continue from the latest checkpoint in `directory`
    /// Called after every completed generation.
    std::function<void(const GenerationLog&)> on_generation;
};

/// The per-mode settings: baseline uses accuracy fitness and no module operators.
FitnessConfig mode_fitness(const EvolutionConfig& cfg, ExperimentMode mode);

RunResult run_es(const EvolutionConfig& cfg, ExperimentMode mode, const Grammar& grammar, const Splits& data,
                 const MeterFactory& meters, int run_index, const RunOptions& options = {});

std::vector<GenerationRow> generation_rows(const RunResult& run, const Grammar& grammar);

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::vector<GenerationRow> rows;
};

/// cfg.runs seeded runs. Each writes run_<i>/generations.csv, checkpoints/,
/// best_genotype.json and best_weights.bin; the root gets generations.csv and
/// final_best.csv over all runs.
ExperimentResult run_experiment(const EvolutionConfig& cfg, ExperimentMode mode, const Grammar& grammar,
                                const Splits& data, const std::string& directory, bool resume = false);

/// Retrain the individual from its recorded evaluation seed and write the
/// two-output weights.
void write_best_weights(const Individual& ind, const Grammar& grammar, const Splits& data, const EvolutionConfig& cfg,
                        const std::string& path);

} // namespace greenevo
