#include "frontier/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "frontier/util.hpp"

namespace frontier {

namespace {

constexpr std::pair<Measure, std::string_view> kMeasureNames[] = {
    {Measure::Emergence, "emergence"},   {Measure::ContentPrescience, "content_prescience"},
    {Measure::ContextPrescience, "context_prescience"}, {Measure::Disruption, "disruption"},
    {Measure::TopCited, "top_cited"},    {Measure::Citations, "citations"},
    {Measure::Publications, "publications"}};

std::map<int, std::vector<const PaperRecord*>> by_year(const CorpusView& view) {
  std::map<int, std::vector<const PaperRecord*>> out;
  for (const auto& p : view) out[p.year].push_back(&p);
  return out;
}

bool passes_fields(const PaperRecord& p, const ReportConfig& cfg) {
  if (cfg.field_filter.empty()) return true;
  return std::any_of(cfg.field_filter.begin(), cfg.field_filter.end(), [&](const auto& f) { return p.in_field(f); });
}

std::vector<CountrySeries> flatten(Measure m, std::map<std::string, std::map<int, SeriesPoint>>&& table) {
  std::vector<CountrySeries> out;
  out.reserve(table.size());
  for (auto& [country, years] : table) out.push_back({m, country, std::move(years)});
  return out;
}

}  // namespace

std::string_view to_string(Measure m) {
  for (const auto& [k, v] : kMeasureNames) {
    if (k == m) return v;
  }
  return "unknown";
}

Measure parse_measure(std::string_view s) {
  for (const auto& [k, v] : kMeasureNames) {
    if (v == s) return k;
  }
  throw std::invalid_argument("unknown measure: " + std::string(s));
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval iv{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Pin the boundaries exactly; the closed form leaves rounding residue there.
  if (successes == 0) iv.low = 0.0;
  if (successes == trials) iv.high = 1.0;
  return iv;
}

CountryGroups CountryGroups::parse(std::string_view text) {
  CountryGroups g;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("country groups line " + std::to_string(line_no) + ": expected 'REGION: CC, ...'");
    }
    auto region = to_upper(trim(std::string_view(line).substr(0, colon)));
    if (region.empty()) throw std::invalid_argument("country groups line " + std::to_string(line_no) + ": empty region");
    std::set<std::string> members;
    for (const auto& cc : split(std::string_view(line).substr(colon + 1), ',')) {
      auto c = to_upper(trim(cc));
      if (!c.empty()) members.insert(std::move(c));
    }
    g.add(std::move(region), std::move(members));
  }
  return g;
}

CountryGroups CountryGroups::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

void CountryGroups::add(std::string region, std::set<std::string> members) {
  groups_[std::move(region)].merge(members);
}

std::set<std::string> CountryGroups::expand(const std::set<std::string>& countries) const {
  std::set<std::string> out = countries;
  for (const auto& [region, members] : groups_) {
    for (const auto& c : countries) {
      if (members.contains(c)) {
        out.insert(region);
        break;
      }
    }
  }
  return out;
}

std::set<std::string> credited_countries(const PaperRecord& p, const ReportConfig& cfg) {
  auto cs = attribute_countries(p, cfg.attribution);
  cs.erase(std::string(kUnknownCountry));
  if (cfg.groups != nullptr && !cs.empty()) return cfg.groups->expand(cs);
  return cs;
}

ShareSlice country_shares(const std::set<std::string>& tags, const CorpusView& view, const ReportConfig& cfg) {
  ShareSlice slice;
  if (tags.empty()) return slice;
  for (const auto& p : view) {
    if (!tags.contains(p.paper_id) || !passes_fields(p, cfg)) continue;
    ++slice.tagged;
    auto cs = credited_countries(p, cfg);
    if (cs.empty()) continue;
    ++slice.attributed;
    for (const auto& c : cs) ++slice.countries[c].count;
  }
  if (slice.tagged == 0) return slice;
  slice.unknown_fraction =
      static_cast<double>(slice.tagged - slice.attributed) / static_cast<double>(slice.tagged);
  for (auto& [c, s] : slice.countries) {
    s.share = static_cast<double>(s.count) / static_cast<double>(slice.attributed);
  }
  return slice;
}

std::map<std::string, CountryRate> per_paper_rate(const std::set<std::string>& tags, const CorpusView& view,
                                                  const ReportConfig& cfg) {
  std::map<std::string, CountryRate> out;
  for (const auto& p : view) {
    if (!passes_fields(p, cfg)) continue;
    const bool tagged = tags.contains(p.paper_id);
    for (const auto& c : credited_countries(p, cfg)) {
      auto& r = out[c];
      ++r.papers;
      if (tagged) ++r.tagged;
    }
  }
  for (auto& [c, r] : out) {
    r.rate = static_cast<double>(r.tagged) / static_cast<double>(r.papers);
    r.ci = wilson_interval(r.tagged, r.papers);
  }
  return out;
}

std::vector<CountrySeries> build_series(Measure measure, const std::set<std::string>& tags, const CorpusView& population,
                                        const ReportConfig& cfg) {
  std::map<std::string, std::map<int, SeriesPoint>> table;
  for (const auto& [year, papers] : by_year(population)) {
    (void)papers;
    auto view = population.filter_year(year);
    auto shares = country_shares(tags, view, cfg);
    for (const auto& [c, r] : per_paper_rate(tags, view, cfg)) {
      SeriesPoint pt;
      pt.rate = r.rate;
      pt.ci_low = r.ci.low;
      pt.ci_high = r.ci.high;
      pt.count = static_cast<std::int64_t>(r.tagged);
      auto it = shares.countries.find(c);
      if (it != shares.countries.end()) pt.share = it->second.share;
      table[c][year] = pt;
    }
  }
  return flatten(measure, std::move(table));
}

std::vector<CountrySeries> citation_series(const CorpusView& population, const ReportConfig& cfg) {
  std::map<std::string, std::map<int, SeriesPoint>> table;
  for (const auto& [year, papers] : by_year(population)) {
    std::map<std::string, std::vector<double>> cites;
    double total = 0.0;
    for (const auto* p : papers) {
      if (!passes_fields(*p, cfg) || !p->citation_count) continue;
      auto cs = credited_countries(*p, cfg);
      if (cs.empty()) continue;
      const double v = static_cast<double>(*p->citation_count);
      total += v;
      for (const auto& c : cs) cites[c].push_back(v);
    }
    for (auto& [c, v] : cites) {
      const double n = static_cast<double>(v.size());
      const double sum = std::accumulate(v.begin(), v.end(), 0.0);
      const double mean = sum / n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      SeriesPoint pt;
      pt.share = total > 0.0 ? sum / total : 0.0;
      pt.rate = mean;
      pt.count = static_cast<std::int64_t>(sum);
      pt.ci_low = std::max(0.0, mean - kZ95 * se);
      pt.ci_high = mean + kZ95 * se;
      table[c][year] = pt;
    }
  }
  return flatten(Measure::Citations, std::move(table));
}

std::vector<CountrySeries> publication_series(const CorpusView& population, const ReportConfig& cfg) {
  std::map<std::string, std::map<int, SeriesPoint>> table;
  for (const auto& [year, papers] : by_year(population)) {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t attributed = 0;
    for (const auto* p : papers) {
      if (!passes_fields(*p, cfg)) continue;
      auto cs = credited_countries(*p, cfg);
      if (cs.empty()) continue;
      ++attributed;
      for (const auto& c : cs) ++counts[c];
    }
    for (const auto& [c, k] : counts) {
      const auto iv = wilson_interval(k, attributed);
      SeriesPoint pt;
      pt.share = static_cast<double>(k) / static_cast<double>(attributed);
      pt.rate = pt.share;
      pt.count = static_cast<std::int64_t>(k);
      pt.ci_low = iv.low;
      pt.ci_high = iv.high;
      table[c][year] = pt;
    }
  }
  return flatten(Measure::Publications, std::move(table));
}

std::set<std::string> tag_field_years(const FieldYearScores& scores, double pct, bool higher_is_better) {
  std::set<std::string> out;
  for (const auto& [key, papers] : scores) {
    std::vector<double> v;
    v.reserve(papers.size());
    for (const auto& s : papers) v.push_back(s.score);
    auto idx = higher_is_better ? select_top(v, pct) : select_bottom(v, pct);
    for (auto i : idx) out.insert(papers[i].paper_id);
  }
  return out;
}

SweepResult threshold_sweep(Measure measure, const FieldYearScores& scores, const CorpusView& population,
                            const ReportConfig& cfg, std::vector<double> pcts, bool higher_is_better) {
  std::sort(pcts.begin(), pcts.end());
  SweepResult res;
  res.pcts = pcts;
  // Nestedness is checked per field-year: a paper in several fields may be
  // tagged through one and not another, so the union alone is too coarse.
  std::vector<std::set<std::string>> prev_cells(scores.size());
  for (double pct : pcts) {
    std::set<std::string> all;
    std::size_t cell = 0;
    for (const auto& [key, papers] : scores) {
      FieldYearScores one{{key, papers}};
      auto tags = tag_field_years(one, pct, higher_is_better);
      if (!std::includes(tags.begin(), tags.end(), prev_cells[cell].begin(), prev_cells[cell].end())) {
        res.nested = false;
      }
      all.insert(tags.begin(), tags.end());
      prev_cells[cell++] = std::move(tags);
    }
    ReportConfig c = cfg;
    c.top_pct = pct;
    res.series.push_back(build_series(measure, all, population, c));
    res.tags.push_back(std::move(all));
  }
  return res;
}

namespace {

// Percentile rank in (0, 100) by mid-rank, so ties share one value.
std::vector<double> percentile_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> pr(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 0.5;  // zero-based mid-rank + 0.5
    for (std::size_t k = i; k <= j; ++k) pr[order[k]] = 100.0 * mid / static_cast<double>(n);
    i = j + 1;
  }
  return pr;
}

}  // namespace

CitationCurve prescience_citation_curve(std::span<const PaperScorePair> scores, const Corpus& corpus, std::size_t bins,
                                        std::string variant, double top_cited_pct) {
  if (bins == 0) throw std::invalid_argument("prescience_citation_curve: bins must be >= 1");
  CitationCurve curve;
  curve.variant = std::move(variant);
  std::vector<double> surprise, prescience, cites;
  for (const auto& s : scores) {
    const auto* p = corpus.find(s.paper_id);
    if (p == nullptr) throw std::invalid_argument("scored paper not in corpus: " + s.paper_id);
    if (!p->citation_count) {
      ++curve.excluded;
      continue;
    }
    surprise.push_back(s.surprise);
    prescience.push_back(s.prescience);
    cites.push_back(static_cast<double>(*p->citation_count));
  }
  const std::size_t n = cites.size();
  if (n == 0) return curve;
  std::vector<char> top(n, 0);
  for (auto i : select_top(cites, top_cited_pct)) top[i] = 1;
  curve.top_cited_fraction =
      static_cast<double>(std::count(top.begin(), top.end(), 1)) / static_cast<double>(n);

  auto binned = [&](const std::vector<double>& values) {
    const auto pr = percentile_ranks(values);
    std::vector<std::size_t> hits(bins, 0), totals(bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto b = static_cast<std::size_t>(pr[i] / 100.0 * static_cast<double>(bins));
      b = std::min(b, bins - 1);
      ++totals[b];
      hits[b] += top[i];
    }
    std::vector<std::optional<double>> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      if (totals[b] > 0) out[b] = static_cast<double>(hits[b]) / static_cast<double>(totals[b]);
    }
    return out;
  };
  const auto sf = binned(surprise);
  const auto pf = binned(prescience);
  for (std::size_t b = 0; b < bins; ++b) {
    CurvePoint pt;
    pt.percentile = 100.0 * (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
    pt.surprise_fraction = sf[b];
    pt.prescience_fraction = pf[b];
    curve.points.push_back(pt);
  }
  return curve;
}

namespace {

constexpr std::string_view kSeriesHeader = "measure,country,year,share,rate,count,ci_low,ci_high";

std::string stamp_line(std::string_view stamp) {
  if (stamp.empty()) return {};
  return "# config_hash=" + std::string(stamp) + "\n";
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void export_series_csv(std::span<const CountrySeries> series, const std::filesystem::path& path,
                       std::string_view stamp) {
  std::string out = stamp_line(stamp);
  out += kSeriesHeader;
  out += '\n';
  for (const auto& s : series) {
    for (const auto& [year, pt] : s.years) {
      const std::string fields[] = {std::string(to_string(s.measure)), s.country, std::to_string(year),
                                    format_double(pt.share), format_double(pt.rate), std::to_string(pt.count),
                                    format_double(pt.ci_low), format_double(pt.ci_high)};
      out += csv_row(fields);
    }
  }
  write_text_file(path, out);
}

std::vector<CountrySeries> read_series_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<CountrySeries> out;
  std::map<std::pair<Measure, std::string>, std::size_t> slot;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kSeriesHeader) throw std::runtime_error("unexpected series header in " + path.string());
      header = true;
      continue;
    }
    auto f = parse_csv_line(line);
    if (f.size() != 8) throw std::runtime_error("malformed series row in " + path.string() + ": " + line);
    const auto m = parse_measure(f[0]);
    auto [it, fresh] = slot.emplace(std::make_pair(m, f[1]), out.size());
    if (fresh) out.push_back({m, f[1], {}});
    SeriesPoint pt;
    pt.share = std::stod(f[3]);
    pt.rate = std::stod(f[4]);
    pt.count = std::stoll(f[5]);
    pt.ci_low = std::stod(f[6]);
    pt.ci_high = std::stod(f[7]);
    out[it->second].years[std::stoi(f[2])] = pt;
  }
  if (!header) throw std::runtime_error("missing series header in " + path.string());
  return out;
}

void export_series_plotdata(std::span<const CountrySeries> series, const std::filesystem::path& dir,
                            std::string_view stamp) {
  std::map<Measure, std::pair<std::string, std::string>> panels;
  for (const auto& s : series) {
    auto& [share, rate] = panels[s.measure];
    for (const auto& [year, pt] : s.years) {
      const auto y = std::to_string(year);
      share += s.country + '\t' + y + '\t' + format_double(pt.share) + "\t\t\n";
      rate += s.country + '\t' + y + '\t' + format_double(pt.rate) + '\t' + format_double(pt.ci_low) + '\t' +
              format_double(pt.ci_high) + '\n';
    }
  }
  const std::string head = stamp_line(stamp) + "country\tx\ty\tband_low\tband_high\n";
  for (const auto& [m, text] : panels) {
    const auto name = std::string(to_string(m));
    write_text_file(dir / (name + "_share.tsv"), head + text.first);
    write_text_file(dir / (name + "_rate.tsv"), head + text.second);
  }
}

void export_curve_csv(const CitationCurve& curve, const std::filesystem::path& path, std::string_view stamp) {
  std::string out = stamp_line(stamp);
  out += "# variant=" + curve.variant + " marker=" + format_double(curve.marker_percentile) +
         " top_cited_fraction=" + format_double(curve.top_cited_fraction) +
         " excluded=" + std::to_string(curve.excluded) + "\n";
  out += "percentile,surprise,prescience\n";
  for (const auto& pt : curve.points) {
    const std::string fields[] = {format_double(pt.percentile), opt_double(pt.surprise_fraction),
                                  opt_double(pt.prescience_fraction)};
    out += csv_row(fields);
  }
  write_text_file(path, out);
}

}  // namespace frontier
