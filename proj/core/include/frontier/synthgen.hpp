#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "frontier/corpus.hpp"

namespace frontier {

// A cluster that appears at `onset` and whose core-paper count follows
// a * exp(b * (year - onset)). Its members start out scattered over host
// clusters and, as core papers accumulate, increasingly co-occur.
struct EmergentPlant {
  int field = 0;
  int onset = 0;
  double a = 2.0;
  double b = 0.5;
  int members_per_paper = 5;  // besides the hub
  int host_mentions = 6;      // yearly host-paper mentions per member
  std::string staff_country;  // empty: staffed from the host clusters
};

// Clusters A and B meet at `year` through a few planted papers and fuse in
// the following `later_years` through many cross papers.
struct MergePlant {
  int field = 0;
  int cluster_a = 0;
  int cluster_b = 1;
  int year = 0;
  double planted_fraction = 0.03;  // of the field-year's papers
  double later_fraction = 0.25;
  int later_years = 2;
  double citation_boost = 0.0;  // planted papers: count * (1 + boost) + 10 * boost
};

// Clusters C and D mix heavily until `quiet_years` before `year`, a few
// planted cross papers still combine them at `year`, and afterwards both
// clusters grow apart.
struct DivergePlant {
  int field = 0;
  int cluster_c = 2;
  int cluster_d = 3;
  int year = 0;
  int quiet_years = 2;
  double early_fraction = 0.15;
  double planted_fraction = 0.03;
  double later_volume = 3.0;  // volume multiplier of C and D after `year`
};

// From `year` on, papers written only by `country` combine clusters A and B;
// nobody else does.
struct NationalPlant {
  std::string country;
  int field = 0;
  int cluster_a = 0;
  int cluster_b = 1;
  int year = 0;
  double fraction = 0.04;
  int authors = 30;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  int first_year = 2000;
  int last_year = 2015;
  int fields = 2;
  int clusters_per_field = 8;
  int keywords_per_cluster = 25;
  int papers_per_field_year = 400;
  double volume_growth = 1.0;  // yearly multiplier
  int keywords_min = 3;
  int keywords_max = 6;
  double cross_cluster_rate = 0.1;
  int authors_per_cluster = 40;
  int authors_min = 1;
  int authors_max = 5;
  int refs_per_paper = 8;
  int venues_per_cluster = 3;
  std::vector<std::string> countries = {"US", "CN", "GB", "DE", "JP", "FR", "IN", "KR", "CA", "IT"};
  double country_concentration = 0.5;  // share of a cluster's authors from its lead country
  double dual_affiliation = 0.05;
  double missing_country = 0.02;
  double missing_corresponding = 0.1;
  double review_fraction = 0.0;
  double non_english_fraction = 0.0;
  double disruptive_fraction = 0.0;
  double consolidating_fraction = 0.0;
  int disruptive_citers = 8;
  std::vector<EmergentPlant> emergent;
  std::vector<MergePlant> merges;
  std::vector<DivergePlant> diverges;
  std::vector<NationalPlant> national;

  // Throws std::invalid_argument explaining the first violated constraint.
  void validate() const;
};

struct TruthEntry {
  std::string measure;  // emergent_area, emergent_paper, prescient, declining, disruptive, consolidating, national
  std::string id;       // paper id, or central keyword for emergent_area
  std::string params;   // key=value;key=value

  bool operator==(const TruthEntry&) const = default;
};

struct GroundTruth {
  std::vector<TruthEntry> entries;

  std::set<std::string> ids(std::string_view measure) const;
  // Entries of a measure whose params contain key=value.
  std::set<std::string> ids_where(std::string_view measure, std::string_view key, std::string_view value) const;

  void save_csv(const std::filesystem::path& path) const;
  static GroundTruth load_csv(const std::filesystem::path& path);
};

struct SynthResult {
  Corpus corpus;
  GroundTruth truth;
  std::unordered_map<std::string, std::string> venues;  // paper id -> own venue
  std::map<std::string, std::vector<std::string>> cluster_keywords;  // "f0c3" / "f0e0" -> keywords
};

// Single-threaded and fully determined by the spec (seed included).
SynthResult generate(const SynthSpec& spec);

// Writes corpus.jsonl and truth.csv into `dir`.
void write_synth(const SynthResult& r, const std::filesystem::path& dir);

// Same records in the OpenAlex works schema (ids prefixed, concepts as
// keywords, country codes on institutions, source as venue).
void export_openalex_jsonl(const SynthResult& r, const std::filesystem::path& path);

// Canned specs used by tests, benchmarks and the acceptance suite.
namespace fixtures {
SynthSpec null_corpus(std::uint64_t seed = 1);
// Emergent clusters plus disruptive and consolidating citations.
SynthSpec standard(std::uint64_t seed = 1);
SynthSpec stationary(std::uint64_t seed = 1);
SynthSpec merging_peaks(std::uint64_t seed = 1);
SynthSpec planted_citation(std::uint64_t seed = 1);
SynthSpec national_vocabulary(std::uint64_t seed = 1);
// ~1000 records with reviews and non-English records mixed in.
SynthSpec mini_corpus(std::uint64_t seed = 1);
SynthSpec scaled(std::size_t papers, std::uint64_t seed = 1);
}  // namespace fixtures

struct DetectorRow {
  std::string measure;
  std::size_t tagged = 0;
  std::size_t planted = 0;
  std::size_t hits = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> auc;  // needs scores
};

// Per-measure precision/recall of tag sets against the planted sets, and the
// rank AUC of planted vs. other scored ids when scores are given. Throws
// std::invalid_argument if a tagged, scored or planted id is not in `universe`.
std::vector<DetectorRow> evaluate_detectors(const std::map<std::string, std::set<std::string>>& tags,
                                            const std::map<std::string, std::map<std::string, double>>& scores,
                                            const GroundTruth& truth, const std::set<std::string>& universe);

}  // namespace frontier
