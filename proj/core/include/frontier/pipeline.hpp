#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "frontier/corpus.hpp"
#include "frontier/disruption.hpp"
#include "frontier/embedding.hpp"
#include "frontier/prescience.hpp"
#include "frontier/report.hpp"

namespace frontier {

// A stage was asked to run before the stage that produces its inputs.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::string& stage)
      : std::runtime_error("missing upstream artifacts: run " + stage + " first"), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::filesystem::path corpus;
  std::string schema = "1";
  std::filesystem::path workdir = "work";
  std::filesystem::path taxonomy;
  std::filesystem::path country_groups;
  std::optional<int> year_from;  // analysis years; derived from the corpus when unset
  std::optional<int> year_to;

  int hypergraph_span = 5;
  int disruption_span = 5;
  int prescience_lag = 2;
  int convergence_lookback = 3;
  int growth_years = 5;

  int embedding_dim = 100;
  int walk_length = 20;
  double walk_alpha = 1.0;
  int walks_per_keyword = 1;
  int embed_epochs = 5;
  int context_window = 5;
  int embed_negatives = 5;

  int factor_dims = 25;
  int factor_epochs = 50;
  int factor_negatives = 5;
  double factor_learning_rate = 0.05;

  std::size_t area_size = 25;
  int min_count = 5;
  std::size_t credit_k = 10;
  double area_top_pct = 0.01;
  double top_pct = 0.05;
  std::vector<double> sweep_pcts = {0.01, 0.05, 0.10};
  std::size_t curve_bins = 100;

  AttributionStrategy attribution = AttributionStrategy::AnyAuthor;
  std::uint64_t seed = 1;
  ExecutionMode mode = ExecutionMode::Deterministic;
  unsigned threads = 0;  // 0: hardware concurrency (parallel mode only)

  bool allow_reviews = false;
  std::set<std::string> languages = {"en"};
  std::string exclude_country;
  std::vector<Variant> variants = {Variant::Content, Variant::Context};
  std::vector<std::string> field_filter;
  std::string synth_fixture = "mini";

  // Flat "key = value" text, '#' comments. Unknown keys are errors. Relative
  // paths are resolved against `base`.
  static PipelineConfig parse(std::string_view text, const std::filesystem::path& base = {});
  static PipelineConfig load(const std::filesystem::path& path);
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {});
  std::string get(std::string_view key) const;
  static std::vector<std::string> keys();
  std::string to_text() const;

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  unsigned effective_threads() const;
};

enum class Stage { Ingest, Synth, Hypergraph, Walks, Embed, Emergence, Prescience, Disruption, Report, Sweep, Exclude };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

struct StageOutcome {
  Stage stage = Stage::Ingest;
  bool skipped = false;  // inputs and config unchanged
  std::string key;
};

// Score rows as persisted by the stages.
struct EmergenceRow {
  std::string paper_id;
  int year = 0;
  std::string field;
  double distance = 0.0;
  bool tagged = false;
};

struct PrescienceRow {
  std::string paper_id;
  int year = 0;
  std::string field;
  Variant variant = Variant::Content;
  double s_pub = 0.0;
  double s_later = 0.0;
  double prescience = 0.0;
  bool capped = false;
  bool prescient = false;
  bool declining = false;
};

struct DisruptionRow {
  std::string paper_id;
  int year = 0;
  std::string field;
  std::optional<double> d;
  std::uint32_t n_f = 0, n_b = 0, n_r = 0;
  bool tagged = false;
};

struct AreaRow {
  int year = 0;
  std::string field;
  std::string central;
  std::vector<std::string> members;
  double convergence = 0.0, growth_b = 0.0, prevalence = 0.0, r2 = 0.0, final_rank_score = 0.0;
  bool selected = false;
};

std::vector<EmergenceRow> read_emergence_rows(const std::filesystem::path& path);
std::vector<PrescienceRow> read_prescience_rows(const std::filesystem::path& path);
std::vector<DisruptionRow> read_disruption_rows(const std::filesystem::path& path);
std::vector<AreaRow> read_area_rows(const std::filesystem::path& path);

struct ExclusionResult {
  std::string country;
  std::vector<CountrySeries> full;
  std::vector<CountrySeries> excluded;
  std::vector<std::string> undefined_cells;  // "field:year" emptied by the exclusion
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  const PipelineConfig& config() const { return cfg_; }
  std::filesystem::path artifact(std::string_view rel) const { return cfg_.workdir / std::filesystem::path(rel); }

  StageOutcome run(Stage s);
  // ingest, hypergraph, walks, embed, emergence, prescience, disruption,
  // report, sweep.
  std::vector<StageOutcome> run_all();

  // Ingested records (everything that passed validation).
  Corpus records() const;
  // Records admitted to analysis (article/language filter).
  Corpus analysis_corpus() const;
  std::pair<int, int> analysis_years() const;

  ExclusionResult exclusion_rerun(const std::string& country);

 private:
  std::string stage_key(Stage s) const;
  bool up_to_date(Stage s, const std::string& key) const;
  void write_manifest(Stage s, const std::string& key, const std::vector<std::string>& outputs) const;
  void require_stage(Stage s) const;

  std::vector<std::string> do_ingest(const std::string& stamp);
  std::vector<std::string> do_synth(const std::string& stamp);
  std::vector<std::string> do_hypergraph(const std::string& stamp);
  std::vector<std::string> do_walks(const std::string& stamp);
  std::vector<std::string> do_embed(const std::string& stamp);
  std::vector<std::string> do_emergence(const std::string& stamp);
  std::vector<std::string> do_prescience(const std::string& stamp);
  std::vector<std::string> do_disruption(const std::string& stamp);
  std::vector<std::string> do_report(const std::string& stamp);
  std::vector<std::string> do_sweep(const std::string& stamp);
  std::vector<std::string> do_exclude(const std::string& stamp);

  // Papers used to train embeddings and factor models (analysis corpus minus
  // the excluded country, if any).
  Corpus training_corpus() const;
  std::vector<int> embedding_years() const;

  PipelineConfig cfg_;
  std::string training_exclusion_;  // set only inside exclusion sub-runs
  mutable std::optional<Corpus> records_;
};

}  // namespace frontier
