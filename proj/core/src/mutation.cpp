#include "greenevo/mutation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "greenevo/error.hpp"

namespace greenevo {

namespace {

bool in_unit(double p)
{
    return p >= 0.0 && p <= 1.0;
}

int dense_layers(const Individual& ind, const Grammar& grammar)
{
    try {
        return count_hidden_layers(ind, grammar);
    } catch (const Error&) {
        return -1;
    }
}

} // namespace

void MutationRates::validate() const
{
    for (double p : {add_layer, reuse_layer, remove_layer, reuse_module, remove_module, dsge_level, macro_layer, train_longer}) {
        if (!in_unit(p)) {
            throw ConfigError("mutation rates must lie in [0, 1]");
        }
    }
}

ModuleArchive::ModuleArchive(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ == 0) {
        throw ConfigError("module archive capacity must be positive");
    }
}

void ModuleArchive::insert(const ModuleGene& module, double power_watts)
{
    if (std::isnan(power_watts)) {
        throw std::invalid_argument("archive power is NaN");
    }
    const double power = std::max(power_watts, kMinArchivePower);
    auto same = std::find_if(entries_.begin(), entries_.end(), [&](const ArchiveEntry& e) { return e.module == module; });
    if (same != entries_.end()) {
        same->power_watts = power;
        return;
    }
    if (entries_.size() >= capacity_) {
        auto worst = std::max_element(entries_.begin(), entries_.end(),
                                      [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.power_watts < b.power_watts; });
        if (worst->power_watts <= power) {
            return;
        }
        entries_.erase(worst);
    }
    entries_.push_back({module, power});
}

std::vector<double> ModuleArchive::selection_probabilities() const
{
    std::vector<double> p;
    p.reserve(entries_.size());
    double total = 0.0;
    for (const auto& e : entries_) {
        p.push_back(1.0 / e.power_watts);
        total += p.back();
    }
    for (auto& v : p) {
        v /= total;
    }
    return p;
}

std::optional<std::size_t> ModuleArchive::select_index(Rng& rng) const
{
    if (entries_.empty()) {
        return std::nullopt;
    }
    const auto p = selection_probabilities();
    const double u = uniform01(rng);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        cumulative += p[i];
        if (u < cumulative) {
            return i;
        }
    }
    return p.size() - 1;
}

ModuleArchive archive_insert(ModuleArchive archive, const ModuleGene& module, double power_watts)
{
    archive.insert(module, power_watts);
    return archive;
}

std::optional<ModuleGene> select_archive_module(const ModuleArchive& archive, Rng& rng)
{
    if (auto i = archive.select_index(rng)) {
        return archive.entries()[*i].module;
    }
    return std::nullopt;
}

GeneList mutate_genes(const Grammar& grammar, const std::string& symbol, const GeneList& genes, Rng& rng)
{
    struct Site {
        bool expansion;
        std::string key;
        std::size_t index;
    };
    // Only sites actually consumed by the derivation are candidates.
    const auto used = decode(grammar, symbol, genes);
    std::vector<Site> sites;
    for (const auto& [nt, count] : used.used_expansions) {
        if (grammar.rule(nt).alternatives.size() > 1) {
            for (std::size_t i = 0; i < count; ++i) {
                sites.push_back({true, nt, i});
            }
        }
    }
    for (const auto& [name, count] : used.used_values) {
        const auto* block = find_block(grammar, name);
        if (block != nullptr && block->hi && *block->hi > block->lo) {
            for (std::size_t i = 0; i < count; ++i) {
                sites.push_back({false, name, i});
            }
        }
    }
    if (sites.empty()) {
        return genes;
    }
    const Site& site = sites[uniform_index(rng, sites.size())];
    GeneList out = genes;
    if (site.expansion) {
        const auto n = static_cast<int>(grammar.rule(site.key).alternatives.size());
        int& choice = out.expansions[site.key][site.index];
        const int shift = static_cast<int>(uniform_int(rng, 1, n - 1));
        choice = (choice + shift) % n;
        return repair(grammar, symbol, out, rng);
    }
    const auto* block = find_block(grammar, site.key);
    double& v = out.values[site.key][site.index];
    if (block->kind == BlockKind::integer) {
        v = sample_block_value(*block, rng);
    } else {
        const double width = *block->hi - block->lo;
        const double moved = v + 0.15 * width * standard_normal(rng);
        v = std::clamp(moved, block->lo, std::nextafter(*block->hi, block->lo));
    }
    return out;
}

Individual mutate(const Individual& parent, const MutationContext& ctx, Rng& rng, MutationLog* log)
{
    ctx.rates.validate();
    MutationLog local;
    MutationLog& fired = log != nullptr ? *log : local;
    const Grammar& g = ctx.grammar;

    Individual child = parent;
    child.evaluation.reset();

    if (bernoulli(rng, ctx.rates.train_longer) && child.train_budget < ctx.max_epochs) {
        child.train_budget = std::min(child.train_budget + ctx.train_longer_increment, ctx.max_epochs);
        ++fired.train_longer;
    }

    // Modules touched by structural or grammar operators, by identity of position
    // after all operators ran.
    std::vector<bool> modified(child.modules.size(), false);

    const auto keep_if_valid = [&](Individual& candidate, const Individual& before) {
        if (dense_layers(candidate, g) < 2) {
            candidate = before;
            return false;
        }
        return true;
    };

    for (std::size_t m = 0; m < child.modules.size(); ++m) {
        if (bernoulli(rng, ctx.rates.add_layer)) {
            auto& module = child.modules[m];
            if (static_cast<int>(module.layers.size()) < module.max_layers) {
                const auto pos = uniform_index(rng, module.layers.size() + 1);
                module.layers.insert(module.layers.begin() + static_cast<std::ptrdiff_t>(pos),
                                     random_derivation(g, module.start_symbol, rng));
                modified[m] = true;
                ++fired.add_layer;
            }
        }
        if (bernoulli(rng, ctx.rates.reuse_layer)) {
            auto& module = child.modules[m];
            if (static_cast<int>(module.layers.size()) < module.max_layers && !module.layers.empty()) {
                const GeneList copy = module.layers[uniform_index(rng, module.layers.size())];
                const auto pos = uniform_index(rng, module.layers.size() + 1);
                module.layers.insert(module.layers.begin() + static_cast<std::ptrdiff_t>(pos), copy);
                modified[m] = true;
                ++fired.reuse_layer;
            }
        }
        if (bernoulli(rng, ctx.rates.remove_layer)) {
            if (static_cast<int>(child.modules[m].layers.size()) > child.modules[m].min_layers) {
                const Individual before = child;
                auto& layers = child.modules[m].layers;
                layers.erase(layers.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, layers.size())));
                if (keep_if_valid(child, before)) {
                    modified[m] = true;
                    ++fired.remove_layer;
                }
            }
        }
        for (std::size_t l = 0; l < child.modules[m].layers.size(); ++l) {
            if (bernoulli(rng, ctx.rates.dsge_level)) {
                const Individual before = child;
                auto& module = child.modules[m];
                module.layers[l] = mutate_genes(g, module.start_symbol, module.layers[l], rng);
                if (keep_if_valid(child, before) && !(child.modules[m].layers[l] == before.modules[m].layers[l])) {
                    modified[m] = true;
                    ++fired.dsge_level;
                }
            }
        }
    }

    if (ctx.module_operators) {
        if (bernoulli(rng, ctx.rates.reuse_module) && ctx.archive != nullptr &&
            static_cast<int>(child.modules.size()) < ctx.genome.max_modules) {
            if (auto picked = select_archive_module(*ctx.archive, rng)) {
                const auto pos = uniform_index(rng, child.modules.size() + 1);
                child.modules.insert(child.modules.begin() + static_cast<std::ptrdiff_t>(pos), std::move(*picked));
                modified.insert(modified.begin() + static_cast<std::ptrdiff_t>(pos), false);
                ++fired.reuse_module;
            }
        }
        if (bernoulli(rng, ctx.rates.remove_module) && child.modules.size() > 1) {
            const Individual before = child;
            const auto victim = uniform_index(rng, child.modules.size());
            child.modules.erase(child.modules.begin() + static_cast<std::ptrdiff_t>(victim));
            if (keep_if_valid(child, before)) {
                modified.erase(modified.begin() + static_cast<std::ptrdiff_t>(victim));
                ++fired.remove_module;
            }
        }
    }

    for (auto& [symbol, genes] : child.macro.genes) {
        if (bernoulli(rng, ctx.rates.macro_layer)) {
            auto mutated = mutate_genes(g, symbol, genes, rng);
            if (!(mutated == genes)) {
                genes = std::move(mutated);
                ++fired.macro_layer;
            }
        }
    }
    const int hidden = count_hidden_layers(child, g);
    if (bernoulli(rng, ctx.rates.macro_layer)) {
        const int drawn = draw_middle_point(g, ctx.genome.middle_point_symbol, hidden, rng);
        if (drawn != child.macro.middle_point) {
            child.macro.middle_point = drawn;
            ++fired.macro_layer;
        }
    }
    child = clamp_middle_point(std::move(child), g);

    if (ctx.probe && ctx.archive != nullptr) {
        for (std::size_t m = 0; m < child.modules.size(); ++m) {
            if (modified[m]) {
                ctx.archive->insert(child.modules[m], ctx.probe(child.modules[m]));
            }
        }
    }
    return child;
}

} // namespace greenevo
