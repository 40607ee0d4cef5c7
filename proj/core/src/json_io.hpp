#pragma once

// nlohmann converters shared by serialize.cpp and evolution.cpp. Not installed.

#include <json.hpp>

#include "greenevo/genome.hpp"
#include "greenevo/mutation.hpp"

namespace greenevo::json_io {

using nlohmann::json;

json to_json(const GeneList& genes);
GeneList gene_list_from(const json& j);

json to_json(const ModuleGene& module);
ModuleGene module_from(const json& j);

json to_json(const EvaluationRecord& rec);
EvaluationRecord evaluation_from(const json& j);

json to_json(const Individual& ind);
Individual individual_from(const json& j);

json to_json(const ModuleArchive& archive);
ModuleArchive archive_from(const json& j);

/// Doubles that may be infinite travel as strings.
json number(double v);
double number_from(const json& j);

} // namespace greenevo::json_io
