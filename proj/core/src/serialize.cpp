#include "greenevo/serialize.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "greenevo/error.hpp"
#include "json_io.hpp"

namespace greenevo {

using nlohmann::json;

std::string format_double(double value)
{
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    if (std::isnan(value)) {
        return "nan";
    }
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return {buf.data(), end};
}

double parse_double(std::string_view text)
{
    if (text == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (text == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace json_io {

json number(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return format_double(v);
}

double number_from(const json& j)
{
    if (j.is_string()) {
        return parse_double(j.get<std::string>());
    }
    return j.get<double>();
}

json to_json(const GeneList& genes)
{
    json out;
    out["expansions"] = genes.expansions;
    out["values"] = genes.values;
    return out;
}

GeneList gene_list_from(const json& j)
{
    GeneList g;
    g.expansions = j.at("expansions").get<std::map<std::string, std::vector<int>>>();
    g.values = j.at("values").get<std::map<std::string, std::vector<double>>>();
    return g;
}

json to_json(const ModuleGene& module)
{
    json layers = json::array();
    for (const auto& l : module.layers) {
        layers.push_back(to_json(l));
    }
    return {{"symbol", module.start_symbol},
            {"min_layers", module.min_layers},
            {"max_layers", module.max_layers},
            {"layers", std::move(layers)}};
}

ModuleGene module_from(const json& j)
{
    ModuleGene m;
    m.start_symbol = j.at("symbol").get<std::string>();
    m.min_layers = j.at("min_layers").get<int>();
    m.max_layers = j.at("max_layers").get<int>();
    for (const auto& l : j.at("layers")) {
        m.layers.push_back(gene_list_from(l));
    }
    return m;
}

json to_json(const EvaluationRecord& rec)
{
    return {{"acc_left", rec.partitions.acc_left},
            {"acc_right", rec.partitions.acc_right},
            {"power_left", rec.partitions.power_left},
            {"power_right", rec.partitions.power_right},
            {"fitness", number(rec.fitness.value)},
            {"epochs_run", rec.epochs_run},
            {"final_loss", number(rec.final_loss)},
            {"failed", rec.failed},
            {"failure", rec.failure},
            {"seed", rec.seed},
            {"wall_seconds", rec.wall_seconds}};
}

EvaluationRecord evaluation_from(const json& j)
{
    EvaluationRecord r;
    r.partitions.acc_left = j.at("acc_left").get<double>();
    r.partitions.acc_right = j.at("acc_right").get<double>();
    r.partitions.power_left = j.at("power_left").get<double>();
    r.partitions.power_right = j.at("power_right").get<double>();
    r.fitness.value = number_from(j.at("fitness"));
    r.epochs_run = j.at("epochs_run").get<int>();
    r.final_loss = number_from(j.at("final_loss"));
    r.failed = j.at("failed").get<bool>();
    r.failure = j.at("failure").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
}

json to_json(const Individual& ind)
{
    json modules = json::array();
    for (const auto& m : ind.modules) {
        modules.push_back(to_json(m));
    }
    json macro = json::object();
    for (const auto& [symbol, genes] : ind.macro.genes) {
        macro[symbol] = to_json(genes);
    }
    json out{{"id", ind.id},
             {"train_budget", ind.train_budget},
             {"modules", std::move(modules)},
             {"macro", std::move(macro)},
             {"middle_point", ind.macro.middle_point}};
    out["evaluation"] = ind.evaluation ? to_json(*ind.evaluation) : json(nullptr);
    return out;
}

Individual individual_from(const json& j)
{
    Individual ind;
    ind.id = j.at("id").get<std::uint64_t>();
    ind.train_budget = j.at("train_budget").get<int>();
    for (const auto& m : j.at("modules")) {
        ind.modules.push_back(module_from(m));
    }
    for (const auto& [symbol, genes] : j.at("macro").items()) {
        ind.macro.genes[symbol] = gene_list_from(genes);
    }
    ind.macro.middle_point = j.at("middle_point").get<int>();
    if (j.contains("evaluation") && !j.at("evaluation").is_null()) {
        ind.evaluation = evaluation_from(j.at("evaluation"));
    }
    return ind;
}

json to_json(const ModuleArchive& archive)
{
    json entries = json::array();
    for (const auto& e : archive.entries()) {
        entries.push_back({{"module", to_json(e.module)}, {"power_watts", e.power_watts}});
    }
    return {{"capacity", archive.capacity()}, {"entries", std::move(entries)}};
}

ModuleArchive archive_from(const json& j)
{
    ModuleArchive archive(j.at("capacity").get<std::size_t>());
    for (const auto& e : j.at("entries")) {
        archive.insert(module_from(e.at("module")), e.at("power_watts").get<double>());
    }
    return archive;
}

} // namespace json_io

namespace {

constexpr const char* kIndividualFormat = "greenevo-individual";
constexpr const char* kModuleFormat = "greenevo-module";
constexpr const char* kArchiveFormat = "greenevo-archive";
constexpr const char* kCheckpointFormat = "greenevo-checkpoint";

json parse_document(std::string_view text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidGenotype(std::string(what) + ": " + e.what());
    }
}

void expect_format(const json& doc, const char* format)
{
    if (!doc.is_object() || doc.value("format", std::string{}) != format) {
        throw InvalidGenotype(std::string("expected a ") + format + " document");
    }
    if (doc.value("version", 0) != kFormatVersion) {
        throw InvalidGenotype(std::string("unsupported ") + format + " version");
    }
}

template <class F>
auto guarded(const char* what, F&& f)
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw InvalidGenotype(std::string(what) + ": " + e.what());
    }
}

std::string envelope(const char* format, const char* key, json body)
{
    json doc{{"format", format}, {"version", kFormatVersion}};
    doc[key] = std::move(body);
    return doc.dump(2) + "\n";
}

} // namespace

std::string individual_document(const Individual& ind)
{
    return envelope(kIndividualFormat, "individual", json_io::to_json(ind));
}

Individual read_individual_document(std::string_view text)
{
    const auto doc = parse_document(text, "individual document");
    expect_format(doc, kIndividualFormat);
    return guarded("individual document", [&] { return json_io::individual_from(doc.at("individual")); });
}

std::string module_document(const ModuleGene& module)
{
    return envelope(kModuleFormat, "module", json_io::to_json(module));
}

ModuleGene read_module_document(std::string_view text)
{
    const auto doc = parse_document(text, "module document");
    if (doc.is_object() && doc.value("format", std::string{}) == kIndividualFormat) {
        const auto ind = read_individual_document(text);
        if (ind.modules.size() != 1) {
            throw InvalidGenotype("individual document must hold exactly one module to be probed");
        }
        return ind.modules.front();
    }
    expect_format(doc, kModuleFormat);
    return guarded("module document", [&] { return json_io::module_from(doc.at("module")); });
}

std::string archive_document(const ModuleArchive& archive)
{
    return envelope(kArchiveFormat, "archive", json_io::to_json(archive));
}

ModuleArchive read_archive_document(std::string_view text)
{
    const auto doc = parse_document(text, "archive document");
    expect_format(doc, kArchiveFormat);
    return guarded("archive document", [&] { return json_io::archive_from(doc.at("archive")); });
}

std::string wrap_checkpoint(std::string_view payload_json)
{
    json payload = json::parse(payload_json);
    const std::string canonical = payload.dump();
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    json doc{{"format", kCheckpointFormat}, {"version", kFormatVersion}, {"checksum", sum}, {"payload", std::move(payload)}};
    return doc.dump() + "\n";
}

std::string unwrap_checkpoint(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint does not parse: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", std::string{}) != kCheckpointFormat) {
        throw CheckpointError("not a checkpoint file");
    }
    if (doc.value("version", 0) != kFormatVersion) {
        throw CheckpointError("unsupported checkpoint version");
    }
    if (!doc.contains("payload") || !doc.contains("checksum") || !doc.at("checksum").is_string()) {
        throw CheckpointError("checkpoint is missing its payload or checksum");
    }
    const std::string canonical = doc.at("payload").dump();
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    if (doc.at("checksum").get<std::string>() != sum) {
        throw CheckpointError("checkpoint checksum mismatch");
    }
    return canonical;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text)
{
    const std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::filesystem::create_directories(target.parent_path());
    }
    const auto tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp);
        }
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) {
            throw Error("write failed: " + tmp);
        }
    }
    std::filesystem::rename(tmp, target);
}

} // namespace greenevo
