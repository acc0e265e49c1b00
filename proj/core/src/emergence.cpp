#include "frontier/emergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "frontier/util.hpp"

namespace frontier {

Area area_of(const EmbeddingSpace& s, std::string_view central, std::size_t size) {
  Area a;
  a.year = s.year();
  a.central = std::string(central);
  a.members.push_back(a.central);
  if (size == 0) return a;
  const auto nn = nearest_neighbors(s, keyword_token(central), size - 1, KindFilter::Keyword);
  for (const auto& n : nn.items) a.members.push_back(n.token.substr(2));
  a.short_area = nn.short_result;
  return a;
}

ConvergenceResult convergence_score(std::span<const EmbeddingSpace* const> spaces, const Area& area) {
  ConvergenceResult result;
  if (spaces.size() < 2) return result;
  // members present in every space
  std::vector<std::string> tokens;
  for (const auto& m : area.members) {
    const auto tok = keyword_token(m);
    const bool everywhere =
        std::all_of(spaces.begin(), spaces.end(), [&](const EmbeddingSpace* s) { return s->contains(tok); });
    if (everywhere) tokens.push_back(tok);
  }
  const std::size_t m = area.members.size();
  const std::size_t present = tokens.size();
  result.skipped_pairs = m * (m - 1) / 2 - present * (present - 1) / 2;
  if (present < 2) return result;

  // distances[k][pair]
  std::vector<std::vector<double>> dist(spaces.size());
  for (std::size_t k = 0; k < spaces.size(); ++k) {
    const auto& s = *spaces[k];
    std::vector<std::size_t> rows;
    for (const auto& t : tokens) rows.push_back(s.row(t));
    for (std::size_t i = 0; i < present; ++i) {
      for (std::size_t j = i + 1; j < present; ++j) {
        dist[k].push_back(cosine_distance(s.row_vector(rows[i]), s.row_vector(rows[j])));
      }
    }
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 1; k < spaces.size(); ++k) {
    for (std::size_t p = 0; p < dist[k].size(); ++p) {
      sum += dist[k][p] - dist[k - 1][p];
      ++n;
    }
  }
  result.score = -(sum / static_cast<double>(n));
  return result;
}

namespace {

struct LinearFit {
  double a = 0.0;
  double c = 0.0;
  double sse = 0.0;
};

LinearFit fit_at(std::span<const double> y, double b) {
  const std::size_t n = y.size();
  std::vector<double> x(n);
  double xm = 0.0, ym = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = std::exp(b * static_cast<double>(t));
    xm += x[t];
    ym += y[t];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sxx += (x[t] - xm) * (x[t] - xm);
    sxy += (x[t] - xm) * (y[t] - ym);
  }
  LinearFit f;
  f.a = sxx > 1e-300 ? sxy / sxx : 0.0;
  f.c = ym - f.a * xm;
  for (std::size_t t = 0; t < n; ++t) {
    const double r = y[t] - (f.a * x[t] + f.c);
    f.sse += r * r;
  }
  return f;
}

constexpr double kMinRate = -2.0;
constexpr double kMaxRate = 3.0;
constexpr int kScanSteps = 500;
constexpr double kRateTolerance = 1e-4;

}  // namespace

GrowthFit frequency_growth(std::span<const double> counts) {
  if (counts.size() < 3) throw std::invalid_argument("frequency_growth needs at least 3 points");
  GrowthFit fit;
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
  double sst = 0.0;
  for (double v : counts) sst += (v - mean) * (v - mean);
  if (!(sst > 0.0)) {
    // constant (or all-zero) series: no growth, R^2 undefined -> 0
    fit.c = mean;
    return fit;
  }

  auto sse = [&](double b) { return fit_at(counts, b).sse; };
  const double step = (kMaxRate - kMinRate) / kScanSteps;
  int best = 0;
  double best_sse = sse(kMinRate);
  for (int i = 1; i <= kScanSteps; ++i) {
    const double v = sse(kMinRate + step * i);
    if (v < best_sse) {
      best_sse = v;
      best = i;
    }
  }
  double lo = kMinRate + step * std::max(0, best - 1);
  double hi = kMinRate + step * std::min(kScanSteps, best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = sse(x1), f2 = sse(x2);
  while (hi - lo > kRateTolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sse(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sse(x2);
    }
  }
  double b = 0.5 * (lo + hi);
  LinearFit lf = fit_at(counts, b);
  // the scan grid point may beat the refined interior point at a boundary
  if (best_sse < lf.sse) {
    b = kMinRate + step * best;
    lf = fit_at(counts, b);
  }
  fit.a = lf.a;
  fit.b = b;
  fit.c = lf.c;
  fit.r2 = 1.0 - lf.sse / sst;
  // An optimum pinned to either end of the bracket means the least-squares
  // problem has no finite minimizer (typically a jump in the last year).
  const bool interior = b > kMinRate + kRateTolerance && b < kMaxRate - kRateTolerance;
  fit.converged = std::isfinite(lf.sse) && interior;
  return fit;
}

KeywordCounts::KeywordCounts(const CorpusView& view) {
  for (const auto& p : view) {
    if (p.keywords.empty()) continue;
    for (const auto& f : p.fields) {
      auto& cell = cells_[{f, p.year}];
      for (const auto& k : p.keywords) ++cell.counts[k];
      cell.total += p.keywords.size();
    }
  }
}

const KeywordCounts::Cell* KeywordCounts::cell(std::string_view field, int year) const {
  auto it = cells_.find(std::make_pair(std::string(field), year));
  return it == cells_.end() ? nullptr : &it->second;
}

std::uint64_t KeywordCounts::count(std::string_view field, int year, std::string_view keyword) const {
  const Cell* c = cell(field, year);
  if (!c) return 0;
  auto it = c->counts.find(keyword);
  return it == c->counts.end() ? 0 : it->second;
}

std::uint64_t KeywordCounts::total(std::string_view field, int year) const {
  const Cell* c = cell(field, year);
  return c ? c->total : 0;
}

const std::map<std::string, std::uint64_t, std::less<>>* KeywordCounts::counts(std::string_view field, int year) const {
  const Cell* c = cell(field, year);
  return c ? &c->counts : nullptr;
}

std::optional<double> prevalence(std::string_view keyword, std::string_view field, int year, const CorpusView& view) {
  std::uint64_t hits = 0, total = 0;
  for (const auto& p : view) {
    if (p.year != year || !p.in_field(field)) continue;
    total += p.keywords.size();
    hits += static_cast<std::uint64_t>(std::count(p.keywords.begin(), p.keywords.end(), keyword));
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

namespace {

// 1-based positions, descending by value, ties get the mean position.
std::vector<double> descending_positions(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> pos(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) pos[order[k]] = mean;
    i = j + 1;
  }
  return pos;
}

}  // namespace

std::vector<ScoredArea> rank_areas(std::vector<ScoredArea> candidates) {
  const std::size_t n = candidates.size();
  std::vector<double> conv(n), growth(n), prev(n), r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    conv[i] = candidates[i].scores.convergence;
    growth[i] = candidates[i].scores.growth_b;
    prev[i] = candidates[i].scores.prevalence;
    r2[i] = candidates[i].scores.fit_r2;
  }
  const auto p1 = descending_positions(conv), p2 = descending_positions(growth), p3 = descending_positions(prev),
             p4 = descending_positions(r2);
  for (std::size_t i = 0; i < n; ++i) {
    candidates[i].scores.final_rank_score = (p1[i] + p2[i] + p3[i] + p4[i]) / 4.0;
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const ScoredArea& a, const ScoredArea& b) {
    if (a.scores.final_rank_score != b.scores.final_rank_score) {
      return a.scores.final_rank_score < b.scores.final_rank_score;
    }
    return a.area.central < b.area.central;
  });
  return candidates;
}

EmergingSet select_emerging(int year, std::string field, std::span<const ScoredArea> ranked, double top_pct) {
  EmergingSet set;
  set.year = year;
  set.field = std::move(field);
  const std::size_t k = top_count(top_pct, ranked.size());
  set.areas.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  for (auto& a : set.areas) a.area.field = set.field;
  return set;
}

AreaCache::AreaCache(std::vector<const EmbeddingSpace*> spaces, std::size_t area_size)
    : spaces_(std::move(spaces)), area_size_(area_size) {
  if (spaces_.empty()) throw std::invalid_argument("AreaCache needs at least one space");
}

const std::pair<Area, ConvergenceResult>& AreaCache::get(const std::string& central) {
  auto it = cache_.find(central);
  if (it != cache_.end()) return it->second;
  Area a = area_of(*spaces_.back(), central, area_size_);
  auto conv = convergence_score(spaces_, a);
  return cache_.emplace(central, std::make_pair(std::move(a), conv)).first->second;
}

std::vector<ScoredArea> score_field_year(const KeywordCounts& counts, AreaCache& areas, std::string_view field,
                                         int year, const EmergenceConfig& cfg, CandidateStats* stats) {
  CandidateStats local;
  std::vector<ScoredArea> out;
  const auto* now = counts.counts(field, year);
  const std::uint64_t total = counts.total(field, year);
  if (!now || total == 0) {
    if (stats) *stats = local;
    return out;
  }
  const auto& space = areas.current();
  for (const auto& [kw, n] : *now) {
    if (n < static_cast<std::uint64_t>(cfg.min_count)) continue;
    ++local.candidates;
    if (!space.contains_keyword(kw)) {
      ++local.not_embedded;
      continue;
    }
    const auto& [area, conv] = areas.get(kw);
    if (!conv.score) {
      ++local.excluded_convergence;
      continue;
    }
    std::vector<double> series;
    for (int y = year - cfg.growth_years + 1; y <= year; ++y) {
      series.push_back(static_cast<double>(counts.count(field, y, kw)));
    }
    const GrowthFit fit = frequency_growth(series);
    if (!fit.converged) {
      ++local.excluded_fit;
      continue;
    }
    ScoredArea sa;
    sa.area = area;
    sa.area.field = std::string(field);
    sa.scores.convergence = *conv.score;
    sa.scores.growth_b = fit.b;
    sa.scores.prevalence = static_cast<double>(n) / static_cast<double>(total);
    sa.scores.fit_r2 = fit.r2;
    out.push_back(std::move(sa));
  }
  if (stats) *stats = local;
  return rank_areas(std::move(out));
}

std::optional<double> paper_distance(const PaperRecord& p, const EmbeddingSpace& s, std::span<const Area> areas) {
  if (areas.empty()) return std::nullopt;
  std::vector<double> pc;
  try {
    pc = centroid(s, p.keywords);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  std::optional<double> best;
  for (const auto& a : areas) {
    std::vector<double> ac;
    try {
      ac = centroid(s, a.members);
    } catch (const std::invalid_argument&) {
      continue;
    }
    double d;
    try {
      d = cosine_distance(pc, ac);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (!best || d < *best) best = d;
  }
  return best;
}

std::vector<std::string> tag_emergent_papers(std::span<const PaperDistance> distances, double pct) {
  std::vector<double> d;
  d.reserve(distances.size());
  for (const auto& x : distances) d.push_back(x.distance);
  std::vector<std::string> out;
  for (auto i : select_bottom(d, pct)) out.push_back(distances[i].paper_id);
  return out;
}

CreditResult emergence_credit(const Area& area, const EmbeddingSpace& s, const CorpusView& window, std::size_t k) {
  CreditResult result;
  std::map<std::string, std::set<std::string>> author_countries;
  for (const auto& p : window) {
    if (std::find(p.keywords.begin(), p.keywords.end(), area.central) == p.keywords.end()) continue;
    for (const auto& a : p.authors) {
      auto& cs = author_countries[a.author_id];
      cs.insert(a.countries.begin(), a.countries.end());
    }
  }
  const auto center = centroid(s, area.members);
  double cn = 0.0;
  for (double x : center) cn += x * x;
  cn = std::sqrt(cn);
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [id, _] : author_countries) {
    const auto tok = author_token(id);
    if (!s.contains(tok)) continue;
    const std::size_t r = s.row(tok);
    const auto v = s.row_vector(r);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += center[i] * v[i];
    const double denom = cn * s.row_norm(r);
    ranked.emplace_back(denom == 0.0 ? 1.0 : 1.0 - dot / denom, id);
  }
  std::sort(ranked.begin(), ranked.end());
  if (ranked.size() < k) result.short_result = true;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    const auto& id = ranked[i].second;
    result.authors.push_back(id);
    const auto& cs = author_countries[id];
    if (cs.empty()) ++result.countries[std::string(kUnknownCountry)];
    for (const auto& c : cs) ++result.countries[c];
  }
  return result;
}

LiftResult cooccurrence_lift(const EmbeddingSpace& s, const CorpusView& next_year, double threshold,
                             std::size_t max_pairs, std::uint64_t seed) {
  LiftResult result;
  std::vector<std::size_t> rows;
  std::unordered_map<std::string, std::uint32_t> kw_index;
  for (std::size_t r = 0; r < s.size(); ++r) {
    if (s.kind(r) != NodeKind::Keyword) continue;
    kw_index.emplace(s.token(r).substr(2), static_cast<std::uint32_t>(rows.size()));
    rows.push_back(r);
  }
  const std::size_t n = rows.size();
  if (n < 2 || next_year.empty()) return result;

  std::unordered_set<std::uint64_t> cooccur;
  for (const auto& p : next_year) {
    std::vector<std::uint32_t> ids;
    for (const auto& k : p.keywords) {
      auto it = kw_index.find(k);
      if (it != kw_index.end()) ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        cooccur.insert((static_cast<std::uint64_t>(ids[i]) << 32) | ids[j]);
      }
    }
  }

  auto visit = [&](std::uint32_t i, std::uint32_t j) {
    if (i > j) std::swap(i, j);
    const double d = cosine_distance(s.row_vector(rows[i]), s.row_vector(rows[j]));
    const bool co = cooccur.contains((static_cast<std::uint64_t>(i) << 32) | j);
    if (d <= threshold) {
      ++result.close_pairs;
      result.close_cooccurring += co;
    } else {
      ++result.far_pairs;
      result.far_cooccurring += co;
    }
  };

  const std::size_t all_pairs = n * (n - 1) / 2;
  if (all_pairs <= max_pairs) {
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) visit(i, j);
    }
  } else {
    Rng rng = derived_rng(seed, 0x11F7);
    for (std::size_t t = 0; t < max_pairs; ++t) {
      auto i = static_cast<std::uint32_t>(uniform_index(rng, n));
      auto j = static_cast<std::uint32_t>(uniform_index(rng, n - 1));
      if (j >= i) ++j;
      visit(i, j);
    }
  }

  if (result.close_pairs == 0) return result;
  const double p_close = static_cast<double>(result.close_cooccurring) / static_cast<double>(result.close_pairs);
  double p_base;
  if (result.far_pairs == 0) {
    // every pair is close: the baseline is the whole population
    p_base = p_close;
  } else {
    p_base = static_cast<double>(result.far_cooccurring) / static_cast<double>(result.far_pairs);
  }
  if (p_base > 0.0) result.lift = p_close / p_base;
  return result;
}

}  // namespace frontier
