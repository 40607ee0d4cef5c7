#include "greenevo/results.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "greenevo/error.hpp"
#include "greenevo/serialize.hpp"

namespace greenevo {

namespace {

constexpr std::string_view kHeader =
    "run,generation,individual,fitness,acc_left,acc_right,power_left_w,power_right_w,hidden_layers,middle_point,"
    "train_budget_epochs";

template <class Int>
Int parse_int(std::string_view field, std::size_t line)
{
    Int v{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw DataError("generations.csv line " + std::to_string(line) + ": bad integer '" + std::string(field) + "'");
    }
    return v;
}

double parse_real(std::string_view field, std::size_t line)
{
    try {
        return parse_double(field);
    } catch (const std::invalid_argument&) {
        throw DataError("generations.csv line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    }
}

} // namespace

std::string_view generation_csv_header() noexcept
{
    return kHeader;
}

std::string format_generation_row(const GenerationRow& r)
{
    std::string out;
    out += std::to_string(r.run) + ',' + std::to_string(r.generation) + ',' + std::to_string(r.individual) + ',';
    out += format_double(r.fitness) + ',' + format_double(r.acc_left) + ',' + format_double(r.acc_right) + ',';
    out += format_double(r.power_left) + ',' + format_double(r.power_right) + ',';
    out += std::to_string(r.hidden_layers) + ',' + std::to_string(r.middle_point) + ',' + std::to_string(r.train_budget);
    return out;
}

std::string format_generation_csv(const std::vector<GenerationRow>& rows)
{
    std::string out(kHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += format_generation_row(r);
        out += '\n';
    }
    return out;
}

std::vector<GenerationRow> parse_generation_csv(std::string_view text)
{
    std::vector<GenerationRow> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != kHeader) {
                throw DataError("generations.csv: unexpected header '" + std::string(line) + "'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (f.size() != 11) {
            throw DataError("generations.csv line " + std::to_string(line_no) + ": expected 11 fields");
        }
        GenerationRow r;
        r.run = parse_int<int>(f[0], line_no);
        r.generation = parse_int<int>(f[1], line_no);
        r.individual = parse_int<std::uint64_t>(f[2], line_no);
        r.fitness = parse_real(f[3], line_no);
        r.acc_left = parse_real(f[4], line_no);
        r.acc_right = parse_real(f[5], line_no);
        r.power_left = parse_real(f[6], line_no);
        r.power_right = parse_real(f[7], line_no);
        r.hidden_layers = parse_int<int>(f[8], line_no);
        r.middle_point = parse_int<int>(f[9], line_no);
        r.train_budget = parse_int<int>(f[10], line_no);
        rows.push_back(r);
    }
    if (!header_seen) {
        throw DataError("generations.csv: missing header");
    }
    return rows;
}

GenerationRow make_generation_row(int run, int generation, const Individual& ind, const Grammar& grammar)
{
    GenerationRow r;
    r.run = run;
    r.generation = generation;
    r.individual = ind.id;
    if (ind.evaluation) {
        const auto& e = *ind.evaluation;
        r.fitness = e.fitness.value;
        r.acc_left = e.partitions.acc_left;
        r.acc_right = e.partitions.acc_right;
        r.power_left = e.partitions.power_left;
        r.power_right = e.partitions.power_right;
    }
    r.hidden_layers = count_hidden_layers(ind, grammar);
    r.middle_point = ind.macro.middle_point;
    r.train_budget = ind.train_budget;
    return r;
}

bool ranks_before(const GenerationRow& a, const GenerationRow& b) noexcept
{
    if (a.fitness != b.fitness) {
        return a.fitness > b.fitness;
    }
    if (a.power_left != b.power_left) {
        return a.power_left < b.power_left;
    }
    return a.individual < b.individual;
}

std::vector<GenerationRow> best_per_generation(const std::vector<GenerationRow>& rows)
{
    std::map<std::pair<int, int>, GenerationRow> best;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.run, r.generation);
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, r);
        } else if (ranks_before(r, it->second)) {
            it->second = r;
        }
    }
    std::vector<GenerationRow> out;
    out.reserve(best.size());
    for (auto& [key, r] : best) {
        out.push_back(r);
    }
    return out;
}

} // namespace greenevo
