#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frontier/corpus.hpp"

namespace frontier {

// Native line-delimited schema and the OpenAlex "works" export schema.
inline constexpr std::string_view kSchemaNative = "1";
inline constexpr std::string_view kSchemaOpenAlex = "openalex";

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct IngestOptions {
  std::string schema_version{kSchemaNative};
  std::optional<int> min_year;
  std::optional<int> max_year;
  const FieldTaxonomy* taxonomy = nullptr;
  // OpenAlex concepts deeper than this level are ignored; -1 keeps all.
  int openalex_min_concept_level = 0;
};

struct IngestResult {
  Corpus corpus;
  std::vector<Rejection> rejections;
};

// Reads one record per line; blank lines and lines starting with # are ignored.
// Malformed lines and duplicate ids are skipped and
// reported; an unreadable file throws std::runtime_error.
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options = {});
IngestResult ingest_text(std::string_view text, const IngestOptions& options = {});

// Parses and normalizes a single native-schema line; throws
// std::invalid_argument with the rejection reason.
PaperRecord parse_record(std::string_view line);
PaperRecord parse_openalex_record(std::string_view line, int min_concept_level = 0);

std::string record_to_json(const PaperRecord& p);
void export_jsonl(const Corpus& c, const std::filesystem::path& path);
std::string export_jsonl_text(const Corpus& c);

void write_rejections_csv(std::span<const Rejection> rejections, const std::filesystem::path& path);

}  // namespace frontier
