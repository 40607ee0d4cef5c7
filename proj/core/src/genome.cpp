#include "greenevo/genome.hpp"

#include <algorithm>
#include <cmath>

#include "greenevo/error.hpp"

namespace greenevo {

namespace {

constexpr int kInitAttempts = 1000;

ModuleGene make_module(const Grammar& grammar, const GenomeConfig& cfg, Rng& rng)
{
    ModuleGene m;
    m.start_symbol = cfg.module_symbol;
    m.min_layers = cfg.min_layers;
    m.max_layers = cfg.max_layers;
    const auto n = uniform_int(rng, cfg.init_min_layers, cfg.init_max_layers);
    for (std::int64_t i = 0; i < n; ++i) {
        m.layers.push_back(random_derivation(grammar, cfg.module_symbol, rng));
    }
    return m;
}

} // namespace

bool same_genotype(const Individual& a, const Individual& b)
{
    return a.modules == b.modules && a.macro == b.macro;
}

void GenomeConfig::validate() const
{
    if (min_layers < 1) {
        throw ConfigError("genome.min_layers must be >= 1");
    }
    if (min_layers > max_layers) {
        throw ConfigError("genome.min_layers (" + std::to_string(min_layers) + ") exceeds genome.max_layers (" +
                          std::to_string(max_layers) + ")");
    }
    if (init_min_layers > init_max_layers || init_min_layers < min_layers || init_max_layers > max_layers) {
        throw ConfigError("genome initial layer range must lie inside [min_layers, max_layers]");
    }
    if (init_min_modules < 1 || init_min_modules > init_max_modules || init_max_modules > max_modules) {
        throw ConfigError("genome initial module range must lie inside [1, max_modules]");
    }
    if (initial_train_budget < 1) {
        throw ConfigError("initial train budget must be >= 1 epoch");
    }
    if (module_symbol.empty() || middle_point_symbol.empty()) {
        throw ConfigError("genome symbols must be non-empty");
    }
}

std::string_view to_string(Activation act) noexcept
{
    switch (act) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    }
    return "?";
}

Activation parse_activation(std::string_view text)
{
    if (text == "relu") return Activation::relu;
    if (text == "sigmoid") return Activation::sigmoid;
    if (text == "softmax") return Activation::softmax;
    throw InvalidGenotype("unknown activation '" + std::string(text) + "'");
}

int PhenotypeSpec::dense_count() const
{
    return static_cast<int>(std::count_if(layers.begin(), layers.end(), [](const LayerSpec& l) { return l.kind == LayerKind::dense; }));
}

LayerSpec decode_layer(const Grammar& grammar, const std::string& symbol, const GeneList& genes)
{
    const auto attrs = decode(grammar, symbol, genes).attributes;
    const auto& kind = attribute_string(attrs, "layer");
    LayerSpec spec;
    if (kind == "dense") {
        spec.kind = LayerKind::dense;
        const double units = attribute_number(attrs, "units");
        if (units < 1 || units != std::floor(units)) {
            throw InvalidGenotype("dense layer needs a positive integer unit count");
        }
        spec.units = static_cast<int>(units);
        spec.activation = parse_activation(attribute_string(attrs, "act"));
    } else if (kind == "dropout") {
        spec.kind = LayerKind::dropout;
        spec.rate = attribute_number(attrs, "rate");
        if (spec.rate < 0.0 || spec.rate >= 1.0) {
            throw InvalidGenotype("dropout rate must lie in [0, 1)");
        }
    } else {
        throw InvalidGenotype("unknown layer kind '" + kind + "'");
    }
    return spec;
}

std::vector<LayerSpec> module_layers(const ModuleGene& module, const Grammar& grammar)
{
    std::vector<LayerSpec> out;
    out.reserve(module.layers.size());
    for (const auto& genes : module.layers) {
        out.push_back(decode_layer(grammar, module.start_symbol, genes));
    }
    return out;
}

int count_hidden_layers(const ModuleGene& module, const Grammar& grammar)
{
    int n = 0;
    for (const auto& genes : module.layers) {
        n += decode_layer(grammar, module.start_symbol, genes).kind == LayerKind::dense ? 1 : 0;
    }
    return n;
}

int count_hidden_layers(const Individual& ind, const Grammar& grammar)
{
    int n = 0;
    for (const auto& m : ind.modules) {
        n += count_hidden_layers(m, grammar);
    }
    return n;
}

int draw_middle_point(const Grammar& grammar, const std::string& symbol, int hidden_layers, Rng& rng)
{
    const auto bound = std::max(0, hidden_layers - 2);
    const Grammar bound_grammar = bind_dynamic_bound(grammar, bound);
    const auto genes = random_derivation(bound_grammar, symbol, rng);
    const auto attrs = decode(bound_grammar, symbol, genes).attributes;
    return static_cast<int>(attribute_number(attrs, "middle_point"));
}

Individual clamp_middle_point(Individual ind, const Grammar& grammar)
{
    const int upper = std::max(0, count_hidden_layers(ind, grammar) - 2);
    ind.macro.middle_point = std::clamp(ind.macro.middle_point, 0, upper);
    return ind;
}

ModuleGene random_module(const Grammar& grammar, const GenomeConfig& cfg, Rng& rng)
{
    return make_module(grammar, cfg, rng);
}

Individual init_individual(const Grammar& grammar, const GenomeConfig& cfg, Rng& rng, std::uint64_t id)
{
    cfg.validate();
    Individual ind;
    ind.id = id;
    ind.train_budget = cfg.initial_train_budget;
    // Rejection sampling keeps the layer distribution uniform over valid shapes.
    for (int attempt = 0;; ++attempt) {
        if (attempt == kInitAttempts) {
            throw ConfigError("could not initialise an individual with at least 2 dense layers; check the grammar and layer ranges");
        }
        ind.modules.clear();
        const auto n_modules = uniform_int(rng, cfg.init_min_modules, cfg.init_max_modules);
        for (std::int64_t i = 0; i < n_modules; ++i) {
            ind.modules.push_back(make_module(grammar, cfg, rng));
        }
        if (count_hidden_layers(ind, grammar) >= 2) {
            break;
        }
    }
    for (const auto& symbol : cfg.macro_symbols) {
        ind.macro.genes[symbol] = random_derivation(grammar, symbol, rng);
    }
    ind.macro.middle_point = draw_middle_point(grammar, cfg.middle_point_symbol, count_hidden_layers(ind, grammar), rng);
    return ind;
}

PhenotypeSpec to_phenotype(const Individual& ind, const Grammar& grammar)
{
    PhenotypeSpec spec;
    for (const auto& m : ind.modules) {
        for (const auto& genes : m.layers) {
            spec.layers.push_back(decode_layer(grammar, m.start_symbol, genes));
        }
    }
    const int dense = spec.dense_count();
    if (dense < 2) {
        throw InvalidGenotype("phenotype needs at least 2 dense layers, has " + std::to_string(dense));
    }
    if (ind.macro.middle_point < 0 || ind.macro.middle_point > dense - 2) {
        throw InvalidGenotype("middle_point " + std::to_string(ind.macro.middle_point) + " outside [0, " +
                              std::to_string(dense - 2) + "]");
    }
    spec.aux_index = ind.macro.middle_point;
    for (const auto& [symbol, genes] : ind.macro.genes) {
        const auto attrs = decode(grammar, symbol, genes).attributes;
        if (auto it = attrs.find("lr"); it != attrs.end()) {
            spec.hyperparams.learning_rate = attribute_number(attrs, "lr");
        }
        if (auto it = attrs.find("batch_size"); it != attrs.end()) {
            const double b = attribute_number(attrs, "batch_size");
            if (b < 1) {
                throw InvalidGenotype("batch_size must be >= 1");
            }
            spec.hyperparams.batch_size = static_cast<int>(b);
        }
    }
    return spec;
}

std::vector<std::string> check_invariants(const Individual& ind, const Grammar& grammar)
{
    std::vector<std::string> problems;
    if (ind.modules.empty()) {
        problems.emplace_back("individual has no modules");
    }
    int dense = 0;
    for (std::size_t i = 0; i < ind.modules.size(); ++i) {
        const auto& m = ind.modules[i];
        const auto n = static_cast<int>(m.layers.size());
        if (n < m.min_layers || n > m.max_layers) {
            problems.push_back("module " + std::to_string(i) + " has " + std::to_string(n) + " layers outside [" +
                               std::to_string(m.min_layers) + ", " + std::to_string(m.max_layers) + "]");
        }
        for (const auto& genes : m.layers) {
            try {
                dense += decode_layer(grammar, m.start_symbol, genes).kind == LayerKind::dense ? 1 : 0;
            } catch (const Error& e) {
                problems.push_back("module " + std::to_string(i) + ": " + e.what());
            }
        }
    }
    if (dense < 2) {
        problems.push_back("only " + std::to_string(dense) + " dense layers");
    }
    if (ind.macro.middle_point < 0 || ind.macro.middle_point > std::max(0, dense - 2)) {
        problems.push_back("middle_point " + std::to_string(ind.macro.middle_point) + " outside [0, H-2]");
    }
    for (const auto& [symbol, genes] : ind.macro.genes) {
        try {
            decode(grammar, symbol, genes);
        } catch (const Error& e) {
            problems.push_back("macro <" + symbol + ">: " + e.what());
        }
    }
    if (ind.train_budget < 1) {
        problems.emplace_back("train budget below one epoch");
    }
    return problems;
}

} // namespace greenevo
