#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "greenevo/genome.hpp"
#include "greenevo/mutation.hpp"

namespace greenevo {

inline constexpr int kFormatVersion = 1;

/// Shortest decimal text that reads back to the same double; dot decimal,
/// no grouping, independent of the global locale. Infinities print as
/// `inf` / `-inf`.
std::string format_double(double value);
/// Inverse of format_double; throws std::invalid_argument on trailing junk.
double parse_double(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Versioned JSON documents. Readers throw InvalidGenotype on malformed input.
std::string individual_document(const Individual& ind);
Individual read_individual_document(std::string_view text);

std::string module_document(const ModuleGene& module);
/// Accepts a module document, or an individual document holding exactly one module.
ModuleGene read_module_document(std::string_view text);

std::string archive_document(const ModuleArchive& archive);
ModuleArchive read_archive_document(std::string_view text);

/// Checkpoint envelope: format tag, version and an FNV-1a checksum over the
/// serialized payload. unwrap_checkpoint throws CheckpointError when any of
/// them is wrong or the text does not parse.
std::string wrap_checkpoint(std::string_view payload_json);
std::string unwrap_checkpoint(std::string_view text);

std::string read_text_file(const std::string& path);
/// Writes to a sibling temporary file and renames it into place.
void write_text_file(const std::string& path, std::string_view text);

} // namespace greenevo
