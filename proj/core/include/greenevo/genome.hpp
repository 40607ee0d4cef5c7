#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "greenevo/grammar.hpp"
#include "greenevo/record.hpp"
#include "greenevo/rng.hpp"

namespace greenevo {

/// A contiguous block of layers, each layer encoded as genes of `start_symbol`.
struct ModuleGene {
    std::string start_symbol;
    std::vector<GeneList> layers;
    int min_layers = 1;
    int max_layers = 1;

    bool operator==(const ModuleGene&) const = default;
};

struct MacroGenes {
    std::map<std::string, GeneList> genes; ///< keyed by macro nonterminal
    int middle_point = 0;

    bool operator==(const MacroGenes&) const = default;
};

struct Individual {
    std::vector<ModuleGene> modules;
    MacroGenes macro;
    std::uint64_t id = 0;
    std::optional<EvaluationRecord> evaluation;
    int train_budget = 1; ///< epochs
};

/// Genotype equality ignores id, evaluation and budget.
bool same_genotype(const Individual& a, const Individual& b);

struct GenomeConfig {
    std::string module_symbol = "layer";
    int min_layers = 1;
    int max_layers = 5;
    int init_min_layers = 2;
    int init_max_layers = 3;
    int init_min_modules = 1;
    int init_max_modules = 1;
    int max_modules = 3;
    std::vector<std::string> macro_symbols{"learning"};
    std::string middle_point_symbol = "middle_point";
    int initial_train_budget = 3;

    void validate() const;
};

enum class LayerKind { dense, dropout };
enum class Activation { relu, sigmoid, softmax };

std::string_view to_string(Activation act) noexcept;
Activation parse_activation(std::string_view text);

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int units = 0;                         ///< dense only
    Activation activation = Activation::relu; ///< dense only
    double rate = 0.0;                     ///< dropout only

    bool operator==(const LayerSpec&) const = default;
};

struct Hyperparams {
    double learning_rate = 0.01;
    int batch_size = 32;

    bool operator==(const Hyperparams&) const = default;
};

struct PhenotypeSpec {
    std::vector<LayerSpec> layers;
    int aux_index = 0; ///< index among dense layers after which the auxiliary head attaches
    Hyperparams hyperparams;

    int dense_count() const;
    bool operator==(const PhenotypeSpec&) const = default;
};

/// Decode one layer's genes. Layers carry `layer:dense` with `units` and `act`,
/// or `layer:dropout` with `rate`.
LayerSpec decode_layer(const Grammar& grammar, const std::string& symbol, const GeneList& genes);

Individual init_individual(const Grammar& grammar, const GenomeConfig& cfg, Rng& rng, std::uint64_t id = 0);

/// Random module of `cfg.module_symbol` layers, sized within the initial range.
ModuleGene random_module(const Grammar& grammar, const GenomeConfig& cfg, Rng& rng);

/// Dense (trainable) layers across all modules. Dropout layers do not count.
int count_hidden_layers(const Individual& ind, const Grammar& grammar);
int count_hidden_layers(const ModuleGene& module, const Grammar& grammar);

/// middle_point clipped into [0, H - 2].
Individual clamp_middle_point(Individual ind, const Grammar& grammar);

/// Draw middle_point from the middle_point rule with its bound set to H - 2.
int draw_middle_point(const Grammar& grammar, const std::string& symbol, int hidden_layers, Rng& rng);

PhenotypeSpec to_phenotype(const Individual& ind, const Grammar& grammar);

/// Flatten the layers of a single module into a phenotype (aux_index 0,
/// default hyperparameters); used to build probe networks.
std::vector<LayerSpec> module_layers(const ModuleGene& module, const Grammar& grammar);

/// Every broken Individual invariant, described; empty when valid.
std::vector<std::string> check_invariants(const Individual& ind, const Grammar& grammar);

} // namespace greenevo
