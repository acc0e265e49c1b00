#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frontier/corpus.hpp"
#include "frontier/embedding.hpp"

namespace frontier {

// A central keyword plus its nearest keyword neighbours in one year's space.
struct Area {
  int year = 0;
  std::string field;
  std::string central;
  std::vector<std::string> members;  // central first, then by distance
  bool short_area = false;
};

Area area_of(const EmbeddingSpace& s, std::string_view central, std::size_t size = 25);

struct ConvergenceResult {
  std::optional<double> score;  // positive = members moving together
  std::size_t skipped_pairs = 0;
};

// `spaces` runs oldest to newest (t - lookback .. t). Averages the year-on-year
// change of every member pair's cosine distance and negates it. Pairs absent
// from any space are skipped.
ConvergenceResult convergence_score(std::span<const EmbeddingSpace* const> spaces, const Area& area);

struct GrowthFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r2 = 0.0;
  bool converged = true;  // false when b ends on a bracket boundary
};

// Least-squares fit of a*exp(b*t) + c to counts at t = 0..n-1. The rate b is
// searched on [-2, 3] by a coarse scan refined with golden-section search;
// (a, c) are solved in closed form for each b.
GrowthFit frequency_growth(std::span<const double> counts);

// Per field-year keyword occurrence counts over papers with keywords.
class KeywordCounts {
 public:
  KeywordCounts() = default;
  explicit KeywordCounts(const CorpusView& view);

  std::uint64_t count(std::string_view field, int year, std::string_view keyword) const;
  std::uint64_t total(std::string_view field, int year) const;
  const std::map<std::string, std::uint64_t, std::less<>>* counts(std::string_view field, int year) const;

 private:
  struct Cell {
    std::map<std::string, std::uint64_t, std::less<>> counts;
    std::uint64_t total = 0;
  };
  const Cell* cell(std::string_view field, int year) const;
  std::map<std::pair<std::string, int>, Cell, std::less<>> cells_;
};

// Occurrences of kw among the field-year papers of the view divided by all
// keyword occurrences there. nullopt when the field-year has no keywords.
std::optional<double> prevalence(std::string_view keyword, std::string_view field, int year, const CorpusView& view);

struct EmergenceScores {
  double convergence = 0.0;
  double growth_b = 0.0;
  double prevalence = 0.0;
  double fit_r2 = 0.0;
  double final_rank_score = 0.0;
};

struct ScoredArea {
  Area area;
  EmergenceScores scores;
};

// Ranks each metric descending (ties share the mean position), averages the
// four positions into final_rank_score and sorts ascending by it, breaking
// remaining ties by central keyword.
std::vector<ScoredArea> rank_areas(std::vector<ScoredArea> candidates);

struct EmergingSet {
  int year = 0;
  std::string field;
  std::vector<ScoredArea> areas;
};

// First ceil(top_pct * N) entries of an already ranked list.
EmergingSet select_emerging(int year, std::string field, std::span<const ScoredArea> ranked, double top_pct = 0.01);

struct EmergenceConfig {
  std::size_t area_size = 25;
  int lookback = 3;
  int growth_years = 5;
  int min_count = 5;
  double area_top_pct = 0.01;
  double paper_top_pct = 0.05;
  std::size_t credit_k = 10;
};

// Field-independent per-year cache of areas and their convergence scores.
class AreaCache {
 public:
  // spaces: oldest .. newest, newest is the scoring year.
  AreaCache(std::vector<const EmbeddingSpace*> spaces, std::size_t area_size);

  const std::pair<Area, ConvergenceResult>& get(const std::string& central);
  const EmbeddingSpace& current() const { return *spaces_.back(); }

 private:
  std::vector<const EmbeddingSpace*> spaces_;
  std::size_t area_size_;
  std::map<std::string, std::pair<Area, ConvergenceResult>, std::less<>> cache_;
};

struct CandidateStats {
  std::size_t candidates = 0;
  std::size_t excluded_convergence = 0;
  std::size_t excluded_fit = 0;
  std::size_t not_embedded = 0;
};

// Scores every keyword with >= min_count occurrences in the field-year as a
// candidate central keyword and returns the ranked list.
std::vector<ScoredArea> score_field_year(const KeywordCounts& counts, AreaCache& areas, std::string_view field,
                                         int year, const EmergenceConfig& cfg, CandidateStats* stats = nullptr);

// Minimum cosine distance between the centroid of the paper's keywords and the
// centroid of each area's members. nullopt if the paper is unrepresentable or
// there are no areas.
std::optional<double> paper_distance(const PaperRecord& p, const EmbeddingSpace& s, std::span<const Area> areas);

struct PaperDistance {
  std::string paper_id;
  double distance = 0.0;
};

// Papers within the smallest `pct` fraction of distances (ties included).
std::vector<std::string> tag_emergent_papers(std::span<const PaperDistance> distances, double pct = 0.05);

struct CreditResult {
  std::map<std::string, int> countries;  // multiset as country -> count
  std::vector<std::string> authors;      // credited authors, closest first
  bool short_result = false;
};

// The k authors closest to the area centroid among authors with a window
// paper that uses the central keyword; each contributes each of its countries
// once.
CreditResult emergence_credit(const Area& area, const EmbeddingSpace& s, const CorpusView& window, std::size_t k = 10);

struct LiftResult {
  std::optional<double> lift;
  std::size_t close_pairs = 0;
  std::size_t close_cooccurring = 0;
  std::size_t far_pairs = 0;
  std::size_t far_cooccurring = 0;
};

// P(pair co-occurs in a next-year paper | distance <= threshold) over
// P(co-occurs | distance > threshold) for keyword pairs of the space. All
// pairs are used when there are at most max_pairs, otherwise a seeded sample.
LiftResult cooccurrence_lift(const EmbeddingSpace& s, const CorpusView& next_year, double threshold,
                             std::size_t max_pairs = 2'000'000, std::uint64_t seed = 7);

}  // namespace frontier
