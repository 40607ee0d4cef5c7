#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "greenevo/genome.hpp"
#include "greenevo/grammar.hpp"
#include "greenevo/rng.hpp"

namespace greenevo {

struct MutationRates {
    double add_layer = 0.25;
    double reuse_layer = 0.15;
    double remove_layer = 0.25;
    double reuse_module = 0.15;
    double remove_module = 0.25;
    double dsge_level = 0.15;
    double macro_layer = 0.30;
    double train_longer = 0.20;

    static MutationRates none() { return {0, 0, 0, 0, 0, 0, 0, 0}; }
    void validate() const;
};

inline constexpr double kMinArchivePower = 1e-6;
inline constexpr std::size_t kDefaultArchiveCapacity = 256;

struct ArchiveEntry {
    ModuleGene module;
    double power_watts = 0.0;
};

/// Modules and their measured power. Genotypes are unique; when full, the
/// highest-power module (the candidate included) is the one left out.
class ModuleArchive {
public:
    explicit ModuleArchive(std::size_t capacity = kDefaultArchiveCapacity);

    const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Powers are clamped below at kMinArchivePower.
    void insert(const ModuleGene& module, double power_watts);

    /// P(i) = (1 / power_i) / sum_j (1 / power_j); empty when the archive is.
    std::vector<double> selection_probabilities() const;
    std::optional<std::size_t> select_index(Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<ArchiveEntry> entries_;
};

ModuleArchive archive_insert(ModuleArchive archive, const ModuleGene& module, double power_watts);

/// Inverse-power roulette draw; std::nullopt for an empty archive.
std::optional<ModuleGene> select_archive_module(const ModuleArchive& archive, Rng& rng);

using ModuleProbe = std::function<double(const ModuleGene&)>;

struct MutationContext {
    const Grammar& grammar;
    const GenomeConfig& genome;
    MutationRates rates;
    ModuleArchive* archive = nullptr; ///< reuse_module needs one; probed modules are inserted here
    ModuleProbe probe;                ///< measures new or modified modules; may be empty
    bool module_operators = true;     ///< reuse_module / remove_module enabled
    int train_longer_increment = 1;
    int max_epochs = 1000;
};

/// Counts of operators that actually changed the individual.
struct MutationLog {
    int add_layer = 0;
    int reuse_layer = 0;
    int remove_layer = 0;
    int reuse_module = 0;
    int remove_module = 0;
    int dsge_level = 0;
    int macro_layer = 0;
    int train_longer = 0;
};

/// Offspring of `parent`. Every operator is tried independently at its rate;
/// train_longer adds train_longer_increment epochs (capped at max_epochs).
/// Operators that would break an invariant are skipped. The child has no
/// evaluation; its id is left to the caller.
Individual mutate(const Individual& parent, const MutationContext& ctx, Rng& rng, MutationLog* log = nullptr);

/// Point mutation of one gene: a different alternative for a nonterminal
/// (then repaired) or a fresh value for a terminal block. No-op when the
/// genes have nothing to vary.
GeneList mutate_genes(const Grammar& grammar, const std::string& symbol, const GeneList& genes, Rng& rng);

} // namespace greenevo
