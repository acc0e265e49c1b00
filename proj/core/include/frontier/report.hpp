#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frontier/corpus.hpp"

namespace frontier {

enum class Measure { Emergence, ContentPrescience, ContextPrescience, Disruption, TopCited, Citations, Publications };

std::string_view to_string(Measure m);
Measure parse_measure(std::string_view s);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

// Region aggregates, text lines of the form "REGION: CC, CC, ...".
class CountryGroups {
 public:
  static CountryGroups parse(std::string_view text);
  static CountryGroups load(const std::filesystem::path& path);

  void add(std::string region, std::set<std::string> members);
  // The countries plus every region with at least one member among them.
  std::set<std::string> expand(const std::set<std::string>& countries) const;
  bool empty() const { return groups_.empty(); }
  const std::map<std::string, std::set<std::string>>& groups() const { return groups_; }

 private:
  std::map<std::string, std::set<std::string>> groups_;
};

struct ReportConfig {
  AttributionStrategy attribution = AttributionStrategy::AnyAuthor;
  double top_pct = 0.05;
  std::optional<std::string> exclusion;
  std::vector<std::string> field_filter;  // empty = all fields
  const CountryGroups* groups = nullptr;
};

// Countries credited for a paper under the config (strategy + regions).
std::set<std::string> credited_countries(const PaperRecord& p, const ReportConfig& cfg);

struct CountryShare {
  std::uint64_t count = 0;  // tagged papers credited to the country
  double share = 0.0;
};

struct ShareSlice {
  std::map<std::string, CountryShare> countries;
  std::uint64_t tagged = 0;        // tagged papers in the view
  std::uint64_t attributed = 0;    // tagged papers credited to a known country
  double unknown_fraction = 0.0;   // tagged papers without a known country
};

// share(c) = tagged papers credited to c / tagged papers credited to any known
// country. Shares may sum above 1 when papers credit several countries.
ShareSlice country_shares(const std::set<std::string>& tags, const CorpusView& view, const ReportConfig& cfg);

struct CountryRate {
  std::uint64_t tagged = 0;
  std::uint64_t papers = 0;
  double rate = 0.0;
  Interval ci;
};

// rate(c) = tagged papers credited to c / all papers credited to c, over the
// papers of the view (the scored population). Countries without papers are
// omitted.
std::map<std::string, CountryRate> per_paper_rate(const std::set<std::string>& tags, const CorpusView& view,
                                                  const ReportConfig& cfg);

struct SeriesPoint {
  double share = 0.0;
  double rate = 0.0;
  std::int64_t count = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool operator==(const SeriesPoint&) const = default;
};

struct CountrySeries {
  Measure measure = Measure::Publications;
  std::string country;
  std::map<int, SeriesPoint> years;

  bool operator==(const CountrySeries&) const = default;
};

// Per-year shares and rates for a tagged subset of a scored population. The
// interval columns bound the rate.
std::vector<CountrySeries> build_series(Measure measure, const std::set<std::string>& tags, const CorpusView& population,
                                        const ReportConfig& cfg);

// Citation volume: share of citations, mean citations per paper (rate) with a
// normal-approximation interval, count = citations.
std::vector<CountrySeries> citation_series(const CorpusView& population, const ReportConfig& cfg);
// Publication volume: share of attributed papers (also reported as rate).
std::vector<CountrySeries> publication_series(const CorpusView& population, const ReportConfig& cfg);

// Scores of one measure grouped per field-year.
struct ScoredPaper {
  std::string paper_id;
  double score = 0.0;
};
using FieldYearScores = std::map<std::pair<std::string, int>, std::vector<ScoredPaper>>;

// Union over field-years of the top (or bottom) pct per field-year.
std::set<std::string> tag_field_years(const FieldYearScores& scores, double pct, bool higher_is_better = true);

struct SweepResult {
  std::vector<double> pcts;
  std::vector<std::set<std::string>> tags;  // per pct
  std::vector<std::vector<CountrySeries>> series;
  bool nested = true;  // tags[i] subset of tags[i+1] within every field-year
};

SweepResult threshold_sweep(Measure measure, const FieldYearScores& scores, const CorpusView& population,
                            const ReportConfig& cfg, std::vector<double> pcts = {0.01, 0.05, 0.10},
                            bool higher_is_better = true);

struct CurvePoint {
  double percentile = 0.0;  // bin center, 0..100
  std::optional<double> surprise_fraction;
  std::optional<double> prescience_fraction;
};

struct CitationCurve {
  std::string variant;
  std::vector<CurvePoint> points;
  double marker_percentile = 95.0;
  double top_cited_fraction = 0.0;
  std::size_t excluded = 0;  // papers without a citation count
};

struct PaperScorePair {
  std::string paper_id;
  double surprise = 0.0;
  double prescience = 0.0;
};

// For each percentile bin of surprise and of prescience, the fraction of the
// bin's papers among the global top 10% by citation count.
CitationCurve prescience_citation_curve(std::span<const PaperScorePair> scores, const Corpus& corpus,
                                        std::size_t bins = 100, std::string variant = "content",
                                        double top_cited_pct = 0.10);

// Long-form csv: measure,country,year,share,rate,count,ci_low,ci_high.
void export_series_csv(std::span<const CountrySeries> series, const std::filesystem::path& path,
                       std::string_view stamp = {});
std::vector<CountrySeries> read_series_csv(const std::filesystem::path& path);
// One file per panel (<measure>_share.tsv / <measure>_rate.tsv) with
// country, x, y, band_low, band_high columns.
void export_series_plotdata(std::span<const CountrySeries> series, const std::filesystem::path& dir,
                            std::string_view stamp = {});
void export_curve_csv(const CitationCurve& curve, const std::filesystem::path& path, std::string_view stamp = {});

}  // namespace frontier
