#include "greenevo/config.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "greenevo/error.hpp"
#include "greenevo/serialize.hpp"

namespace greenevo {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        const auto item = trim(s.substr(0, comma));
        if (!item.empty()) {
            out.push_back(item);
        }
        if (comma == std::string_view::npos) {
            break;
        }
        s = s.substr(comma + 1);
    }
    return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected)
{
    throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) + "'");
}

template <class Int>
Int to_int(std::string_view key, std::string_view v)
{
    Int out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        bad(key, v, "an integer");
    }
    return out;
}

double to_real(std::string_view key, std::string_view v)
{
    try {
        return parse_double(v);
    } catch (const std::invalid_argument&) {
        bad(key, v, "a number");
    }
}

bool to_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    bad(key, v, "true or false");
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, std::string_view, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string resolve(std::string_view value, const std::string& base)
{
    if (value.empty()) {
        return {};
    }
    std::filesystem::path p{std::string(value)};
    if (p.is_relative() && !base.empty()) {
        p = std::filesystem::path(base) / p;
    }
    return p.lexically_normal().string();
}

#define GE_INT(NAME, EXPR, TYPE)                                                                                        \
    Key{NAME, [](RunConfig& c, std::string_view v, const std::string&) { EXPR = to_int<TYPE>(NAME, v); },              \
        [](const RunConfig& c) { return std::to_string(EXPR); }}
#define GE_REAL(NAME, EXPR)                                                                                             \
    Key{NAME, [](RunConfig& c, std::string_view v, const std::string&) { EXPR = to_real(NAME, v); },                   \
        [](const RunConfig& c) { return format_double(EXPR); }}
#define GE_BOOL(NAME, EXPR)                                                                                             \
    Key{NAME, [](RunConfig& c, std::string_view v, const std::string&) { EXPR = to_bool(NAME, v); },                   \
        [](const RunConfig& c) { return std::string(EXPR ? "true" : "false"); }}
#define GE_STR(NAME, EXPR)                                                                                              \
    Key{NAME, [](RunConfig& c, std::string_view v, const std::string&) { EXPR = std::string(v); },                     \
        [](const RunConfig& c) { return EXPR; }}
#define GE_PATH(NAME, EXPR)                                                                                             \
    Key{NAME, [](RunConfig& c, std::string_view v, const std::string& base) { EXPR = resolve(v, base); },              \
        [](const RunConfig& c) { return EXPR; }}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table{
        GE_INT("evolution.runs", c.evolution.runs, int),
        GE_INT("evolution.generations", c.evolution.generations, int),
        GE_INT("evolution.population_size", c.evolution.population_size, int),
        GE_INT("evolution.seed", c.evolution.seed, std::uint64_t),
        GE_INT("evolution.train_longer_increment", c.evolution.train_longer_increment, int),
        GE_INT("evolution.max_epochs", c.evolution.max_epochs, int),
        GE_REAL("evolution.aux_weight", c.evolution.aux_weight),
        GE_INT("evolution.archive_capacity", c.evolution.archive_capacity, std::size_t),
        GE_INT("evolution.probe_batch", c.evolution.probe_batch, std::size_t),
        GE_REAL("evolution.rates.add_layer", c.evolution.rates.add_layer),
        GE_REAL("evolution.rates.reuse_layer", c.evolution.rates.reuse_layer),
        GE_REAL("evolution.rates.remove_layer", c.evolution.rates.remove_layer),
        GE_REAL("evolution.rates.reuse_module", c.evolution.rates.reuse_module),
        GE_REAL("evolution.rates.remove_module", c.evolution.rates.remove_module),
        GE_REAL("evolution.rates.dsge_level", c.evolution.rates.dsge_level),
        GE_REAL("evolution.rates.macro_layer", c.evolution.rates.macro_layer),
        GE_REAL("evolution.rates.train_longer", c.evolution.rates.train_longer),
        Key{"fitness.kind",
            [](RunConfig& c, std::string_view v, const std::string&) { c.evolution.fitness.kind = parse_fitness_kind(v); },
            [](const RunConfig& c) { return std::string(to_string(c.evolution.fitness.kind)); }},
        GE_REAL("fitness.threshold_left", c.evolution.fitness.threshold_left),
        GE_REAL("fitness.threshold_right", c.evolution.fitness.threshold_right),
        GE_REAL("fitness.power_weight", c.evolution.fitness.power_weight),
        Key{"meter.kind",
            [](RunConfig& c, std::string_view v, const std::string&) {
                if (v == "analytic") {
                    c.evolution.meter.kind = MeterKind::analytic;
                } else if (v == "scripted") {
                    c.evolution.meter.kind = MeterKind::scripted;
                } else {
                    bad("meter.kind", v, "analytic or scripted");
                }
            },
            [](const RunConfig& c) {
                return std::string(c.evolution.meter.kind == MeterKind::analytic ? "analytic" : "scripted");
            }},
        GE_REAL("meter.p_min", c.evolution.meter.analytic.p_min),
        GE_REAL("meter.p_max", c.evolution.meter.analytic.p_max),
        GE_REAL("meter.k", c.evolution.meter.analytic.k),
        GE_REAL("meter.noise_sigma", c.evolution.meter.analytic.noise_sigma),
        GE_INT("meter.seed", c.evolution.meter.analytic.seed, std::uint64_t),
        GE_INT("meter.n_measures", c.evolution.meter.n_measures, int),
        GE_INT("meter.inference_samples", c.evolution.meter.inference_samples, std::size_t),
        Key{"meter.script",
            [](RunConfig& c, std::string_view v, const std::string&) {
                std::vector<EnergyReading> trace;
                for (auto item : split_list(v)) {
                    const auto colon = item.find(':');
                    if (colon == std::string_view::npos) {
                        bad("meter.script", v, "a comma-separated list of mJ:s pairs");
                    }
                    trace.push_back({to_real("meter.script", trim(item.substr(0, colon))),
                                     to_real("meter.script", trim(item.substr(colon + 1)))});
                }
                if (trace.empty()) {
                    bad("meter.script", v, "at least one mJ:s pair");
                }
                c.evolution.meter.script = std::move(trace);
            },
            [](const RunConfig& c) {
                std::string out;
                for (const auto& r : c.evolution.meter.script) {
                    out += (out.empty() ? "" : ",") + format_double(r.millijoules) + ":" + format_double(r.seconds);
                }
                return out;
            }},
        Key{"data.kind",
            [](RunConfig& c, std::string_view v, const std::string&) {
                if (v == "idx") {
                    c.data.kind = DataKind::idx;
                } else if (v == "synthetic") {
                    c.data.kind = DataKind::synthetic;
                } else {
                    bad("data.kind", v, "idx or synthetic");
                }
            },
            [](const RunConfig& c) { return std::string(c.data.kind == DataKind::idx ? "idx" : "synthetic"); }},
        GE_PATH("data.train_images", c.data.train_images),
        GE_PATH("data.train_labels", c.data.train_labels),
        GE_INT("data.train_count", c.data.train_count, std::size_t),
        GE_INT("data.validation_count", c.data.validation_count, std::size_t),
        GE_INT("data.test_count", c.data.test_count, std::size_t),
        GE_BOOL("data.stratified", c.data.stratified),
        GE_INT("data.split_seed", c.data.split_seed, std::uint64_t),
        GE_INT("data.synthetic_classes", c.data.synthetic_classes, int),
        GE_INT("data.synthetic_per_class", c.data.synthetic_per_class, int),
        GE_INT("data.synthetic_dims", c.data.synthetic_dims, int),
        GE_REAL("data.synthetic_separation", c.data.synthetic_separation),
        GE_INT("data.synthetic_seed", c.data.synthetic_seed, std::uint64_t),
        GE_PATH("genome.grammar", c.grammar_path),
        GE_STR("genome.module_symbol", c.evolution.genome.module_symbol),
        GE_INT("genome.min_layers", c.evolution.genome.min_layers, int),
        GE_INT("genome.max_layers", c.evolution.genome.max_layers, int),
        GE_INT("genome.init_min_layers", c.evolution.genome.init_min_layers, int),
        GE_INT("genome.init_max_layers", c.evolution.genome.init_max_layers, int),
        GE_INT("genome.init_min_modules", c.evolution.genome.init_min_modules, int),
        GE_INT("genome.init_max_modules", c.evolution.genome.init_max_modules, int),
        GE_INT("genome.max_modules", c.evolution.genome.max_modules, int),
        Key{"genome.macro_symbols",
            [](RunConfig& c, std::string_view v, const std::string&) {
                c.evolution.genome.macro_symbols.clear();
                for (auto s : split_list(v)) {
                    c.evolution.genome.macro_symbols.emplace_back(s);
                }
            },
            [](const RunConfig& c) {
                std::string out;
                for (const auto& s : c.evolution.genome.macro_symbols) {
                    out += (out.empty() ? "" : ",") + s;
                }
                return out;
            }},
        GE_STR("genome.middle_point_symbol", c.evolution.genome.middle_point_symbol),
        GE_INT("genome.initial_train_budget", c.evolution.genome.initial_train_budget, int),
    };
    return table;
}

#undef GE_INT
#undef GE_REAL
#undef GE_BOOL
#undef GE_STR
#undef GE_PATH

} // namespace

void DataSettings::validate() const
{
    if (kind == DataKind::idx) {
        if (train_images.empty()) {
            throw ConfigError("data.train_images is required when data.kind = idx");
        }
        if (train_labels.empty()) {
            throw ConfigError("data.train_labels is required when data.kind = idx");
        }
    } else {
        if (synthetic_classes < 2 || synthetic_per_class < 1 || synthetic_dims < 1) {
            throw ConfigError("data.synthetic_classes must be >= 2 and per-class count and dims positive");
        }
        if (!(synthetic_separation >= 0.0)) {
            throw ConfigError("data.synthetic_separation must be non-negative");
        }
    }
    if (train_count < 1 || validation_count < 1) {
        throw ConfigError("data.train_count and data.validation_count must be positive");
    }
}

void RunConfig::validate() const
{
    evolution.validate();
    data.validate();
}

RunConfig parse_config(std::string_view text, const std::string& base_dir)
{
    std::map<std::string_view, const Key*> index;
    for (const auto& k : keys()) {
        index.emplace(k.name, &k);
    }
    RunConfig cfg;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) {
            throw ConfigError("unknown key '" + std::string(key) + "' on line " + std::to_string(line_no));
        }
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("key '" + std::string(key) + "' given twice");
        }
        it->second->set(cfg, value, base_dir);
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error&) {
        throw ConfigError("cannot read config file " + path);
    }
    const auto parent = std::filesystem::path(path).parent_path().string();
    return parse_config(text, parent);
}

std::string config_snapshot(const RunConfig& cfg)
{
    std::string out;
    for (const auto& k : keys()) {
        out += k.name + " = " + k.get(cfg) + "\n";
    }
    return out;
}

Grammar load_run_grammar(const RunConfig& cfg)
{
    if (cfg.grammar_path.empty()) {
        return parse_grammar(default_grammar_text());
    }
    return load_grammar(cfg.grammar_path);
}

Splits load_datasets(const DataSettings& data)
{
    data.validate();
    Dataset all = data.kind == DataKind::idx
                      ? load_idx(data.train_images, data.train_labels)
                      : synthetic_dataset(data.synthetic_classes, data.synthetic_per_class, data.synthetic_dims,
                                          data.synthetic_separation, data.synthetic_seed);
    const std::size_t need = data.train_count + data.validation_count + data.test_count;
    if (need > all.size()) {
        throw DataError("requested " + std::to_string(need) + " examples but " + all.source + " holds " +
                        std::to_string(all.size()));
    }
    return split_by_count(all, {data.train_count, data.validation_count, data.test_count}, data.split_seed,
                          data.stratified);
}

} // namespace greenevo
