#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "frontier/corpus.hpp"
#include "frontier/embedding.hpp"

namespace frontier {

enum class Variant { Content, Context };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

class OutOfVocabulary : public std::out_of_range {
 public:
  explicit OutOfVocabulary(const std::string& node) : std::out_of_range("out of vocabulary: " + node) {}
};

// Proximity sums below this are clamped, bounding novelty at -log(1e-300).
inline constexpr double kProximityFloor = 1e-300;

struct Novelty {
  double value = 0.0;
  bool capped = false;
};

// Latent-factor propensity model for one year: every node has a simplex row
// theta (membership over latent dimensions) and a positive salience r.
class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(int year, Variant variant, int dims, std::vector<std::string> nodes, std::vector<double> theta,
              std::vector<double> salience);

  int year() const { return year_; }
  Variant variant() const { return variant_; }
  int dims() const { return dims_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const std::string> nodes() const { return nodes_; }
  bool contains(std::string_view node) const { return index_.contains(std::string(node)); }
  std::size_t row(std::string_view node) const;  // throws OutOfVocabulary
  std::span<const double> theta(std::size_t row) const {
    return {theta_.data() + row * static_cast<std::size_t>(dims_), static_cast<std::size_t>(dims_)};
  }
  double salience(std::size_t row) const { return salience_[row]; }

  // sum_d prod_{i in h} theta_id
  double proximity(std::span<const std::string> h) const;
  // proximity(h) * prod_{i in h} r_i
  double propensity(std::span<const std::string> h) const;
  // -log proximity(h), floored; a single node has novelty 0.
  Novelty novelty(std::span<const std::string> h) const;

  // Binary: int32 year, int32 variant, int32 dims, uint64 count, node table
  // (uint32 length, bytes), float64 theta (count x dims), float64 salience,
  // optional trailer (uint32 length, bytes) artifact stamp.
  void save_binary(const std::filesystem::path& path, std::string_view stamp = {}) const;
  static FactorModel load_binary(const std::filesystem::path& path);

  bool operator==(const FactorModel& o) const {
    return year_ == o.year_ && variant_ == o.variant_ && dims_ == o.dims_ && nodes_ == o.nodes_ &&
           theta_ == o.theta_ && salience_ == o.salience_;
  }

 private:
  std::vector<std::size_t> rows_of(std::span<const std::string> h) const;

  int year_ = 0;
  Variant variant_ = Variant::Content;
  int dims_ = 0;
  std::vector<std::string> nodes_;
  std::vector<double> theta_;
  std::vector<double> salience_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct FactorFitConfig {
  int dims = 25;
  int epochs = 50;
  int negatives = 5;
  double learning_rate = 0.05;
  double decay = 0.5;  // multiply the step by this every decay_every epochs
  int decay_every = 15;
  double init_scale = 0.5;
  bool freeze_salience = false;
  std::uint64_t seed = 1;
  ExecutionMode mode = ExecutionMode::Deterministic;
  unsigned threads = 1;
};

struct FitDiagnostics {
  std::vector<double> epoch_loglik;  // sampled Poisson log-likelihood
  std::size_t positives = 0;
  std::size_t skipped = 0;  // combinations with < 2 distinct nodes
};

// Maximizes the sampled Poisson likelihood sum[y log(lambda) - lambda] over
// observed combinations (y = multiplicity) plus `negatives` random unobserved
// same-size combinations per positive (y = 0). theta rows are parameterized
// through softmax; salience starts at degree / mean degree.
FactorModel fit_factor_model(std::span<const std::vector<std::string>> combinations, const FactorFitConfig& cfg,
                             int year, Variant variant, FitDiagnostics* diagnostics = nullptr);

// The paper's node set under a variant: keywords, or distinct referenced venues.
const std::vector<std::string>& combination_of(const PaperRecord& p, Variant v);

// Combinations (>= 2 nodes) of the papers in a view.
std::vector<std::vector<std::string>> combinations(const CorpusView& view, Variant v);

struct PrescienceScore {
  std::string paper_id;
  double surprise_at_pub = 0.0;
  double surprise_later = 0.0;
  double prescience = 0.0;
  bool capped = false;
};

enum class SurpriseStatus { Ok, TooSmall, MissingAtPublication, MissingLater };

struct SurprisePair {
  SurpriseStatus status = SurpriseStatus::Ok;
  Novelty at_pub;
  Novelty later;
};

// Novelty of the paper's combination under the publication-year model and
// the later model. Any member missing from either vocabulary excludes the
// paper rather than being dropped.
SurprisePair surprise_pair(const FactorModel& at_pub, const FactorModel& later, const PaperRecord& p);

PrescienceScore prescience_score(std::string paper_id, const SurprisePair& pair);

std::vector<std::string> tag_prescient(std::span<const PrescienceScore> scores, double pct = 0.05);
std::vector<std::string> tag_declining(std::span<const PrescienceScore> scores, double pct = 0.05);

}  // namespace frontier
