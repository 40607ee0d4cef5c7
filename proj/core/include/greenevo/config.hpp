#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "greenevo/data.hpp"
#include "greenevo/evolution.hpp"
#include "greenevo/grammar.hpp"

namespace greenevo {

enum class DataKind { idx, synthetic };

struct DataSettings {
    DataKind kind = DataKind::idx;
    std::string train_images; ///< required for idx
    std::string train_labels; ///< required for idx
    std::size_t train_count = 2000;
    std::size_t validation_count = 500;
    std::size_t test_count = 500;
    bool stratified = true;
    std::uint64_t split_seed = 0;
    int synthetic_classes = 10;
    int synthetic_per_class = 300;
    int synthetic_dims = 64;
    double synthetic_separation = 4.0;
    std::uint64_t synthetic_seed = 0;

    void validate() const;
};

/// Everything one `evolve` invocation needs. Keys are namespaced:
/// evolution.*, fitness.*, meter.*, data.*, genome.*.
struct RunConfig {
    EvolutionConfig evolution;
    DataSettings data;
    std::string grammar_path; ///< genome.grammar; empty selects the built-in grammar

    void validate() const;
};

/// `key = value` lines, `#` comments. Unknown or repeated keys and malformed
/// values raise ConfigError naming the key. Relative paths resolve against
/// `base_dir` when given.
RunConfig parse_config(std::string_view text, const std::string& base_dir = {});
RunConfig load_config(const std::string& path);

/// Every key in a fixed order; parse_config(snapshot) reproduces the config.
std::string config_snapshot(const RunConfig& cfg);

Grammar load_run_grammar(const RunConfig& cfg);
Splits load_datasets(const DataSettings& data);

} // namespace greenevo
