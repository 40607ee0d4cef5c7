#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "greenevo/genome.hpp"

namespace greenevo {

/// One evaluated individual of one generation, as logged to generations.csv.
struct GenerationRow {
    int run = 0;
    int generation = 0;
    std::uint64_t individual = 0;
    double fitness = 0.0;
    double acc_left = 0.0;
    double acc_right = 0.0;
    double power_left = 0.0;
    double power_right = 0.0;
    int hidden_layers = 0;
    int middle_point = 0;
    int train_budget = 0;

    bool operator==(const GenerationRow&) const = default;
};

std::string_view generation_csv_header() noexcept;
std::string format_generation_row(const GenerationRow& row);
/// Header plus one line per row.
std::string format_generation_csv(const std::vector<GenerationRow>& rows);
/// Throws DataError when the header or any field does not match the schema.
std::vector<GenerationRow> parse_generation_csv(std::string_view text);

GenerationRow make_generation_row(int run, int generation, const Individual& ind, const Grammar& grammar);

/// Same order as parent selection: higher fitness, then lower power_left, then lower id.
bool ranks_before(const GenerationRow& a, const GenerationRow& b) noexcept;

/// Best row of each (run, generation), ordered by run then generation.
std::vector<GenerationRow> best_per_generation(const std::vector<GenerationRow>& rows);

} // namespace greenevo
