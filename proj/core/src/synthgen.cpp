#include "frontier/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "frontier/ingest.hpp"
#include "frontier/util.hpp"
#include "json.hpp"

namespace frontier {

namespace {

using json = nlohmann::json;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("infeasible synth spec: " + what);
}

bool fraction(double v) { return v >= 0.0 && v <= 1.0; }

std::string params(std::initializer_list<std::pair<std::string_view, std::string>> kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

// k distinct values from [0, n), in draw order.
std::vector<int> sample_distinct(Rng& rng, int n, int k) {
  k = std::min(k, n);
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    auto j = i + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

template <class T>
std::vector<T> sample_from(Rng& rng, const std::vector<T>& items, int k) {
  std::vector<T> out;
  for (int i : sample_distinct(rng, static_cast<int>(items.size()), k)) out.push_back(items[static_cast<std::size_t>(i)]);
  return out;
}

enum class Kind { Normal, Core, MergePlanted, MergeLater, DivergeEarly, DivergePlanted, National };

struct Draft {
  PaperRecord rec;
  Kind kind = Kind::Normal;
  int field = 0;
  std::vector<int> member_of;  // clusters whose later papers may cite this one
  std::vector<int> ref_from;   // clusters this paper cites
  std::vector<int> refs;       // draft indices
  std::string venue;
  double boost = 0.0;
};

class Generator {
 public:
  explicit Generator(const SynthSpec& s) : s_(s), rng_(derived_rng(s.seed, 0x5eed)) {}

  SynthResult run();

 private:
  int static_id(int field, int cluster) const { return field * s_.clusters_per_field + cluster; }
  int emergent_id(std::size_t e) const { return s_.fields * s_.clusters_per_field + static_cast<int>(e); }
  int year_slot(int y) const { return y - s_.first_year; }
  std::string label(int field) const { return "f" + std::to_string(field); }

  void build_clusters();
  std::vector<AuthorRef> make_pool(const std::string& prefix, int n, const std::string& lead, bool fixed_country);
  int add_paper(Kind kind, int field, int year, std::vector<std::string> keywords, std::vector<int> member_of,
                std::vector<int> ref_from, const std::vector<const std::vector<AuthorRef>*>& pools);
  std::vector<std::string> cross_keywords(int a, int b);
  void generate_field_year(int field, int year);
  void plant_consolidating();
  void plant_disruptive();
  void finish(SynthResult& out);

  const SynthSpec& s_;
  Rng rng_;
  std::vector<Draft> papers_;
  std::vector<std::vector<std::string>> keywords_;  // per cluster
  std::vector<std::vector<std::string>> venues_;
  std::vector<std::vector<AuthorRef>> pools_;
  std::vector<std::vector<AuthorRef>> national_pools_;
  std::vector<std::vector<AuthorRef>> staff_pools_;  // per emergent plant, may be empty
  std::vector<std::vector<std::vector<int>>> by_cluster_year_;
  std::vector<std::vector<int>> by_year_;
  std::vector<TruthEntry> truth_;
  std::unordered_set<int> consolidated_;  // focal sets and papers rewired to cite them
};

std::vector<AuthorRef> Generator::make_pool(const std::string& prefix, int n, const std::string& lead,
                                            bool fixed_country) {
  std::vector<AuthorRef> pool;
  for (int i = 0; i < n; ++i) {
    AuthorRef a;
    a.author_id = prefix + "a" + std::to_string(i);
    if (fixed_country) {
      a.countries.insert(lead);
    } else if (uniform_real(rng_) >= s_.missing_country) {
      const bool from_lead = uniform_real(rng_) < s_.country_concentration;
      a.countries.insert(from_lead ? lead : s_.countries[uniform_index(rng_, s_.countries.size())]);
      if (uniform_real(rng_) < s_.dual_affiliation) {
        a.countries.insert(s_.countries[uniform_index(rng_, s_.countries.size())]);
      }
    }
    pool.push_back(std::move(a));
  }
  return pool;
}

void Generator::build_clusters() {
  for (int f = 0; f < s_.fields; ++f) {
    for (int c = 0; c < s_.clusters_per_field; ++c) {
      const std::string name = "f" + std::to_string(f) + "c" + std::to_string(c);
      std::vector<std::string> kws, vs;
      for (int k = 0; k < s_.keywords_per_cluster; ++k) kws.push_back(name + "k" + std::to_string(k));
      for (int v = 0; v < s_.venues_per_cluster; ++v) vs.push_back(name + " journal " + std::to_string(v));
      keywords_.push_back(std::move(kws));
      venues_.push_back(std::move(vs));
      const auto& lead = s_.countries[uniform_index(rng_, s_.countries.size())];
      pools_.push_back(make_pool(name, s_.authors_per_cluster, lead, false));
    }
  }
  for (std::size_t e = 0; e < s_.emergent.size(); ++e) {
    const auto& p = s_.emergent[e];
    const std::string name = "f" + std::to_string(p.field) + "e" + std::to_string(e);
    std::vector<std::string> kws;
    for (int k = 0; k < s_.keywords_per_cluster; ++k) kws.push_back(name + "k" + std::to_string(k));
    keywords_.push_back(std::move(kws));
    venues_.push_back({name + " journal 0"});
    pools_.emplace_back();
    staff_pools_.push_back(p.staff_country.empty() ? std::vector<AuthorRef>{}
                                                   : make_pool(name, s_.authors_per_cluster, p.staff_country, true));
  }
  for (std::size_t n = 0; n < s_.national.size(); ++n) {
    const auto& p = s_.national[n];
    national_pools_.push_back(make_pool("n" + std::to_string(n) + p.country, p.authors, p.country, true));
  }
  const std::size_t years = static_cast<std::size_t>(s_.last_year - s_.first_year + 1);
  by_cluster_year_.assign(keywords_.size(), std::vector<std::vector<int>>(years));
  by_year_.assign(years, {});
}

int Generator::add_paper(Kind kind, int field, int year, std::vector<std::string> keywords, std::vector<int> member_of,
                         std::vector<int> ref_from, const std::vector<const std::vector<AuthorRef>*>& pools) {
  Draft d;
  d.kind = kind;
  d.field = field;
  d.rec.year = year;
  d.rec.fields = {label(field)};
  d.rec.keywords = std::move(keywords);
  d.member_of = std::move(member_of);
  d.ref_from = std::move(ref_from);

  std::vector<const AuthorRef*> candidates;
  std::vector<const std::vector<AuthorRef>*> distinct;
  for (const auto* pool : pools) {
    if (std::find(distinct.begin(), distinct.end(), pool) != distinct.end()) continue;
    distinct.push_back(pool);
    for (const auto& a : *pool) candidates.push_back(&a);
  }
  const int n_auth = s_.authors_min + static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(s_.authors_max - s_.authors_min + 1)));
  int pos = 0;
  for (int i : sample_distinct(rng_, static_cast<int>(candidates.size()), n_auth)) {
    AuthorRef a = *candidates[static_cast<std::size_t>(i)];
    a.position = pos++;
    d.rec.authors.push_back(std::move(a));
  }
  if (!d.rec.authors.empty() && uniform_real(rng_) >= s_.missing_corresponding) {
    d.rec.authors[uniform_index(rng_, d.rec.authors.size())].is_corresponding = true;
  }

  std::vector<int> pool;
  for (int c : d.ref_from) {
    for (int y = std::max(s_.first_year, year - 5); y < year; ++y) {
      const auto& v = by_cluster_year_[static_cast<std::size_t>(c)][static_cast<std::size_t>(year_slot(y))];
      pool.insert(pool.end(), v.begin(), v.end());
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  d.refs = sample_from(rng_, pool, s_.refs_per_paper);
  std::sort(d.refs.begin(), d.refs.end());

  const int home = d.member_of[uniform_index(rng_, d.member_of.size())];
  const auto& vs = venues_[static_cast<std::size_t>(home)];
  d.venue = vs[uniform_index(rng_, vs.size())];

  const int idx = static_cast<int>(papers_.size());
  for (int c : d.member_of) {
    by_cluster_year_[static_cast<std::size_t>(c)][static_cast<std::size_t>(year_slot(year))].push_back(idx);
  }
  by_year_[static_cast<std::size_t>(year_slot(year))].push_back(idx);
  papers_.push_back(std::move(d));
  return idx;
}

std::vector<std::string> Generator::cross_keywords(int a, int b) {
  std::vector<std::string> kws;
  for (int c : {a, b}) {
    const int k = 2 + static_cast<int>(uniform_index(rng_, 2));
    for (auto& kw : sample_from(rng_, keywords_[static_cast<std::size_t>(c)], k)) kws.push_back(std::move(kw));
  }
  return kws;
}

void Generator::generate_field_year(int field, int year) {
  const double base = s_.papers_per_field_year * std::pow(s_.volume_growth, year - s_.first_year);
  const auto scaled = [&](double frac) { return static_cast<int>(std::lround(frac * base)); };
  const std::string y = std::to_string(year);

  for (std::size_t e = 0; e < s_.emergent.size(); ++e) {
    const auto& p = s_.emergent[e];
    if (p.field != field || year < p.onset) continue;
    const int gid = emergent_id(e);
    const auto& kws = keywords_[static_cast<std::size_t>(gid)];
    const int n = static_cast<int>(std::lround(p.a * std::exp(p.b * (year - p.onset))));
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> words{kws[0]};
      std::vector<int> ref_from{gid};
      std::vector<const std::vector<AuthorRef>*> pools;
      if (!staff_pools_[e].empty()) pools.push_back(&staff_pools_[e]);
      for (int m : sample_distinct(rng_, static_cast<int>(kws.size()) - 1, p.members_per_paper)) {
        words.push_back(kws[static_cast<std::size_t>(m + 1)]);
        const int host = static_id(field, (m + 1) % s_.clusters_per_field);
        if (std::find(ref_from.begin(), ref_from.end(), host) == ref_from.end()) ref_from.push_back(host);
        if (staff_pools_[e].empty()) pools.push_back(&pools_[static_cast<std::size_t>(host)]);
      }
      const int idx = add_paper(Kind::Core, field, year, std::move(words), {gid}, std::move(ref_from), pools);
      truth_.push_back({"emergent_paper", std::to_string(idx), params({{"field", label(field)}, {"year", y}, {"central", kws[0]}})});
    }
  }

  for (const auto& m : s_.merges) {
    if (m.field != field) continue;
    const int a = static_id(field, m.cluster_a), b = static_id(field, m.cluster_b);
    const std::vector<const std::vector<AuthorRef>*> pools{&pools_[static_cast<std::size_t>(a)], &pools_[static_cast<std::size_t>(b)]};
    if (year == m.year) {
      for (int i = 0, n = scaled(m.planted_fraction); i < n; ++i) {
        const int idx = add_paper(Kind::MergePlanted, field, year, cross_keywords(a, b), {a, b}, {a, b}, pools);
        papers_[static_cast<std::size_t>(idx)].boost = m.citation_boost;
        truth_.push_back({"prescient", std::to_string(idx),
                          params({{"field", label(field)}, {"year", y}, {"clusters", "f" + std::to_string(field) + "c" +
                                                                                           std::to_string(m.cluster_a) + "+c" +
                                                                                           std::to_string(m.cluster_b)}})});
      }
    } else if (year > m.year && year <= m.year + m.later_years) {
      for (int i = 0, n = scaled(m.later_fraction); i < n; ++i) {
        add_paper(Kind::MergeLater, field, year, cross_keywords(a, b), {a, b}, {a, b}, pools);
      }
    }
  }

  for (const auto& d : s_.diverges) {
    if (d.field != field || year > d.year) continue;
    const int c = static_id(field, d.cluster_c), e = static_id(field, d.cluster_d);
    const std::vector<const std::vector<AuthorRef>*> pools{&pools_[static_cast<std::size_t>(c)], &pools_[static_cast<std::size_t>(e)]};
    const bool planted = year == d.year;
    if (!planted && year >= d.year - d.quiet_years) continue;
    for (int i = 0, n = scaled(planted ? d.planted_fraction : d.early_fraction); i < n; ++i) {
      const int idx = add_paper(planted ? Kind::DivergePlanted : Kind::DivergeEarly, field, year, cross_keywords(c, e),
                                {c, e}, {c, e}, pools);
      if (planted) truth_.push_back({"declining", std::to_string(idx), params({{"field", label(field)}, {"year", y}})});
    }
  }

  for (std::size_t n = 0; n < s_.national.size(); ++n) {
    const auto& p = s_.national[n];
    if (p.field != field || year < p.year) continue;
    const int a = static_id(field, p.cluster_a), b = static_id(field, p.cluster_b);
    for (int i = 0, k = scaled(p.fraction); i < k; ++i) {
      const int idx = add_paper(Kind::National, field, year, cross_keywords(a, b), {a, b}, {a, b}, {&national_pools_[n]});
      truth_.push_back({"national", std::to_string(idx), params({{"field", label(field)}, {"year", y}, {"country", p.country}})});
    }
  }

  std::vector<double> weights(static_cast<std::size_t>(s_.clusters_per_field), 1.0);
  for (const auto& d : s_.diverges) {
    if (d.field == field && year > d.year) {
      weights[static_cast<std::size_t>(d.cluster_c)] *= d.later_volume;
      weights[static_cast<std::size_t>(d.cluster_d)] *= d.later_volume;
    }
  }
  const double total_w = std::accumulate(weights.begin(), weights.end(), 0.0);
  const int normals = static_cast<int>(std::lround(base * total_w / s_.clusters_per_field));
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<std::vector<int>> by_cluster(static_cast<std::size_t>(s_.clusters_per_field));
  for (int i = 0; i < normals; ++i) {
    const int c = pick(rng_);
    const int gid = static_id(field, c);
    const int k = s_.keywords_min + static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(s_.keywords_max - s_.keywords_min + 1)));
    auto words = sample_from(rng_, keywords_[static_cast<std::size_t>(gid)], k);
    if (s_.clusters_per_field > 1 && uniform_real(rng_) < s_.cross_cluster_rate) {
      int other = static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(s_.clusters_per_field - 1)));
      if (other >= c) ++other;
      const auto& ok = keywords_[static_cast<std::size_t>(static_id(field, other))];
      words.push_back(ok[uniform_index(rng_, ok.size())]);
    }
    const int idx = add_paper(Kind::Normal, field, year, std::move(words), {gid}, {gid}, {&pools_[static_cast<std::size_t>(gid)]});
    by_cluster[static_cast<std::size_t>(c)].push_back(idx);
  }

  // Emergent members are mentioned at a steady rate in their host clusters,
  // before and after onset.
  for (std::size_t e = 0; e < s_.emergent.size(); ++e) {
    const auto& p = s_.emergent[e];
    if (p.field != field) continue;
    const auto& kws = keywords_[static_cast<std::size_t>(emergent_id(e))];
    for (std::size_t m = 0; m < kws.size(); ++m) {
      const auto& hosts = by_cluster[m % static_cast<std::size_t>(s_.clusters_per_field)];
      for (int idx : sample_from(rng_, hosts, p.host_mentions)) {
        auto& words = papers_[static_cast<std::size_t>(idx)].rec.keywords;
        if (std::find(words.begin(), words.end(), kws[m]) == words.end()) words.push_back(kws[m]);
      }
    }
  }
}

// Consolidating papers: every in-window citer of the paper or of its
// references cites all of them, so D = -1.
void Generator::plant_consolidating() {
  if (s_.consolidating_fraction <= 0.0) return;
  std::vector<int> eligible;
  for (int y = s_.first_year + 1; y <= s_.last_year - 5; ++y) {
    for (int idx : by_year_[static_cast<std::size_t>(year_slot(y))]) {
      const auto& d = papers_[static_cast<std::size_t>(idx)];
      if (d.kind == Kind::Normal && !d.refs.empty()) eligible.push_back(idx);
    }
  }
  const int want = static_cast<int>(std::lround(s_.consolidating_fraction * static_cast<double>(eligible.size())));
  std::unordered_set<int> used;
  int planted = 0;
  for (int idx : sample_from(rng_, eligible, static_cast<int>(eligible.size()))) {
    if (planted >= want) break;
    auto& f = papers_[static_cast<std::size_t>(idx)];
    std::vector<int> set{idx};
    set.insert(set.end(), f.refs.begin(), f.refs.end());
    if (std::any_of(set.begin(), set.end(), [&](int i) { return used.contains(i) || consolidated_.contains(i); })) continue;
    const int y0 = f.rec.year;
    std::vector<int> window;
    for (int y = y0 + 1; y <= y0 + 5; ++y) {
      for (int i : by_cluster_year_[static_cast<std::size_t>(f.member_of[0])][static_cast<std::size_t>(year_slot(y))]) {
        if (papers_[static_cast<std::size_t>(i)].kind == Kind::Normal) window.push_back(i);
      }
    }
    if (window.empty()) continue;
    used.insert(set.begin(), set.end());
    std::unordered_set<int> touched;
    for (int c : sample_from(rng_, window, s_.disruptive_citers)) touched.insert(c);
    for (int y = y0 + 1; y <= y0 + 5; ++y) {
      for (int c : by_year_[static_cast<std::size_t>(year_slot(y))]) {
        const auto& r = papers_[static_cast<std::size_t>(c)].refs;
        if (std::any_of(set.begin(), set.end(), [&](int s) { return std::binary_search(r.begin(), r.end(), s); })) {
          touched.insert(c);
        }
      }
    }
    for (int c : touched) {
      auto& r = papers_[static_cast<std::size_t>(c)].refs;
      r.insert(r.end(), set.begin(), set.end());
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      consolidated_.insert(c);
    }
    consolidated_.insert(set.begin(), set.end());
    truth_.push_back({"consolidating", std::to_string(idx), params({{"year", std::to_string(y0)}})});
    ++planted;
  }
}

// Disruptive papers: references rewired to papers at least five years older
// (nobody in the window cites those), plus extra in-window citers, so D = 1.
void Generator::plant_disruptive() {
  if (s_.disruptive_fraction <= 0.0) return;
  std::vector<int> eligible;
  for (int y = s_.first_year + 5; y <= s_.last_year - 5; ++y) {
    for (int idx : by_year_[static_cast<std::size_t>(year_slot(y))]) {
      if (papers_[static_cast<std::size_t>(idx)].kind == Kind::Normal && !consolidated_.contains(idx)) eligible.push_back(idx);
    }
  }
  const int want = static_cast<int>(std::lround(s_.disruptive_fraction * static_cast<double>(eligible.size())));
  const auto focals = sample_from(rng_, eligible, want);
  const std::unordered_set<int> focal_set(focals.begin(), focals.end());
  std::unordered_set<int> old_used;
  for (int idx : focals) {
    auto& f = papers_[static_cast<std::size_t>(idx)];
    const int y0 = f.rec.year;
    const auto& cy = by_cluster_year_[static_cast<std::size_t>(f.member_of[0])];
    std::vector<int> old;
    for (int y = std::max(s_.first_year, y0 - 8); y <= y0 - 5; ++y) {
      for (int i : cy[static_cast<std::size_t>(year_slot(y))]) {
        if (!old_used.contains(i) && !consolidated_.contains(i) && !focal_set.contains(i)) old.push_back(i);
      }
    }
    auto refs = sample_from(rng_, old, std::max(1, s_.refs_per_paper / 2));
    if (refs.empty()) continue;
    std::vector<int> window;
    for (int y = y0 + 1; y <= y0 + 5; ++y) {
      for (int i : cy[static_cast<std::size_t>(year_slot(y))]) {
        if (papers_[static_cast<std::size_t>(i)].kind == Kind::Normal && !focal_set.contains(i)) window.push_back(i);
      }
    }
    old_used.insert(refs.begin(), refs.end());
    std::sort(refs.begin(), refs.end());
    f.refs = std::move(refs);
    for (int c : sample_from(rng_, window, s_.disruptive_citers)) {
      auto& r = papers_[static_cast<std::size_t>(c)].refs;
      if (!std::binary_search(r.begin(), r.end(), idx)) r.insert(std::upper_bound(r.begin(), r.end(), idx), idx);
    }
    truth_.push_back({"disruptive", std::to_string(idx), params({{"year", std::to_string(y0)}})});
  }
}

void Generator::finish(SynthResult& out) {
  const int width = std::max<int>(6, static_cast<int>(std::to_string(papers_.size()).size()));
  auto id_of = [&](int idx) {
    auto s = std::to_string(idx);
    return "p" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
  };
  std::vector<std::int64_t> citers(papers_.size(), 0);
  for (const auto& d : papers_) {
    for (int r : d.refs) ++citers[static_cast<std::size_t>(r)];
  }
  std::vector<int> plain;
  for (std::size_t i = 0; i < papers_.size(); ++i) {
    if (papers_[i].kind == Kind::Normal && !consolidated_.contains(static_cast<int>(i))) plain.push_back(static_cast<int>(i));
  }
  std::unordered_set<int> planted_ids;
  for (const auto& t : truth_) planted_ids.insert(std::stoi(t.id));
  std::vector<int> flaggable;
  for (int i : plain) {
    if (!planted_ids.contains(i)) flaggable.push_back(i);
  }
  const auto n_flag = static_cast<double>(papers_.size());
  auto shuffled = sample_from(rng_, flaggable, static_cast<int>(flaggable.size()));
  const auto reviews = static_cast<std::size_t>(std::lround(s_.review_fraction * n_flag));
  const auto foreign = static_cast<std::size_t>(std::lround(s_.non_english_fraction * n_flag));
  require(reviews + foreign <= shuffled.size(), "review and non-English fractions exceed the unplanted papers");
  for (std::size_t i = 0; i < reviews; ++i) papers_[static_cast<std::size_t>(shuffled[i])].rec.is_review = true;
  for (std::size_t i = reviews; i < reviews + foreign; ++i) {
    papers_[static_cast<std::size_t>(shuffled[i])].rec.language = (i % 2) ? "de" : "zh";
  }

  std::lognormal_distribution<double> extra(1.0, 1.0);
  std::vector<PaperRecord> records;
  records.reserve(papers_.size());
  for (std::size_t i = 0; i < papers_.size(); ++i) {
    auto& d = papers_[i];
    d.rec.paper_id = id_of(static_cast<int>(i));
    std::set<std::string> seen;
    for (int r : d.refs) {
      d.rec.references.push_back(id_of(r));
      const auto& v = papers_[static_cast<std::size_t>(r)].venue;
      if (seen.insert(v).second) d.rec.ref_venues.push_back(v);
    }
    double c = static_cast<double>(citers[i]) + std::floor(extra(rng_));
    if (d.boost > 0.0) c = c * (1.0 + d.boost) + 10.0 * d.boost;
    d.rec.citation_count = static_cast<std::int64_t>(c);
    out.venues.emplace(d.rec.paper_id, d.venue);
    records.push_back(d.rec);
  }
  for (auto& t : truth_) {
    if (t.measure != "emergent_area") t.id = id_of(std::stoi(t.id));
  }
  out.corpus = Corpus(std::move(records));
}

SynthResult Generator::run() {
  s_.validate();
  build_clusters();
  for (int y = s_.first_year; y <= s_.last_year; ++y) {
    for (int f = 0; f < s_.fields; ++f) generate_field_year(f, y);
  }
  plant_consolidating();
  plant_disruptive();
  SynthResult out;
  finish(out);
  for (std::size_t e = 0; e < s_.emergent.size(); ++e) {
    const auto& p = s_.emergent[e];
    const auto& kws = keywords_[static_cast<std::size_t>(emergent_id(e))];
    out.truth.entries.push_back({"emergent_area", kws[0],
                                 params({{"field", label(p.field)}, {"onset", std::to_string(p.onset)},
                                         {"a", format_double(p.a)}, {"b", format_double(p.b)}})});
  }
  out.truth.entries.insert(out.truth.entries.end(), truth_.begin(), truth_.end());
  for (int f = 0; f < s_.fields; ++f) {
    for (int c = 0; c < s_.clusters_per_field; ++c) {
      out.cluster_keywords["f" + std::to_string(f) + "c" + std::to_string(c)] = keywords_[static_cast<std::size_t>(static_id(f, c))];
    }
  }
  for (std::size_t e = 0; e < s_.emergent.size(); ++e) {
    out.cluster_keywords["f" + std::to_string(s_.emergent[e].field) + "e" + std::to_string(e)] =
        keywords_[static_cast<std::size_t>(emergent_id(e))];
  }
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  require(last_year >= first_year, "last_year before first_year");
  require(fields >= 1 && clusters_per_field >= 1, "need at least one field and one cluster");
  require(keywords_per_cluster >= 2, "clusters need at least two keywords");
  require(papers_per_field_year >= 0 && volume_growth > 0.0, "volume must be nonnegative and growth positive");
  require(keywords_min >= 1 && keywords_max >= keywords_min && keywords_max <= keywords_per_cluster,
          "keywords per paper must satisfy 1 <= min <= max <= keywords per cluster");
  require(authors_min >= 1 && authors_max >= authors_min && authors_max <= authors_per_cluster,
          "authors per paper must satisfy 1 <= min <= max <= authors per cluster");
  require(refs_per_paper >= 0 && venues_per_cluster >= 1, "bad reference or venue count");
  require(!countries.empty(), "country list is empty");
  for (double f : {cross_cluster_rate, country_concentration, dual_affiliation, missing_country, missing_corresponding,
                   review_fraction, non_english_fraction, disruptive_fraction, consolidating_fraction}) {
    require(fraction(f), "fractions must lie in [0, 1]");
  }
  require(review_fraction + non_english_fraction <= 1.0, "review and non-English fractions sum above 1");
  auto in_field = [&](int f, int c) { return f >= 0 && f < fields && c >= 0 && c < clusters_per_field; };
  for (const auto& e : emergent) {
    require(e.field >= 0 && e.field < fields, "emergent plant in unknown field");
    require(e.members_per_paper >= 1 && e.members_per_paper < keywords_per_cluster, "emergent members per paper out of range");
    require(e.a > 0.0 && e.host_mentions >= 0, "emergent plant needs a > 0");
  }
  // Planted volumes are fractions of the field-year's base volume; per
  // field-year they must not add up above it.
  std::map<std::pair<int, int>, double> load;
  for (const auto& m : merges) {
    require(in_field(m.field, m.cluster_a) && in_field(m.field, m.cluster_b) && m.cluster_a != m.cluster_b,
            "merge plant names unknown or identical clusters");
    require(fraction(m.planted_fraction) && fraction(m.later_fraction) && m.citation_boost >= 0.0, "merge fractions out of [0, 1]");
    load[{m.field, m.year}] += m.planted_fraction;
    for (int y = m.year + 1; y <= std::min(last_year, m.year + m.later_years); ++y) load[{m.field, y}] += m.later_fraction;
  }
  for (const auto& d : diverges) {
    require(in_field(d.field, d.cluster_c) && in_field(d.field, d.cluster_d) && d.cluster_c != d.cluster_d,
            "diverge plant names unknown or identical clusters");
    require(fraction(d.early_fraction) && fraction(d.planted_fraction) && d.later_volume > 0.0 && d.quiet_years >= 0, "diverge fractions out of [0, 1]");
    for (int y = first_year; y < d.year; ++y) load[{d.field, y}] += d.early_fraction;
    load[{d.field, d.year}] += d.planted_fraction;
  }
  for (const auto& n : national) {
    require(in_field(n.field, n.cluster_a) && in_field(n.field, n.cluster_b) && n.cluster_a != n.cluster_b,
            "national plant names unknown or identical clusters");
    require(fraction(n.fraction) && n.authors >= authors_max, "national plant fraction or author pool out of range");
    require(std::find(countries.begin(), countries.end(), n.country) == countries.end(),
            "national plant country " + n.country + " also appears in the general country mix");
    for (int y = n.year; y <= last_year; ++y) load[{n.field, y}] += n.fraction;
  }
  for (const auto& [key, total] : load) {
    require(total <= 1.0, "planted fractions for field " + std::to_string(key.first) + " in " + std::to_string(key.second) +
                              " sum to " + format_double(total) + " > 1");
  }
}

std::set<std::string> GroundTruth::ids(std::string_view measure) const {
  std::set<std::string> out;
  for (const auto& e : entries) {
    if (e.measure == measure) out.insert(e.id);
  }
  return out;
}

std::set<std::string> GroundTruth::ids_where(std::string_view measure, std::string_view key, std::string_view value) const {
  const std::string needle = std::string(key) + "=" + std::string(value);
  std::set<std::string> out;
  for (const auto& e : entries) {
    if (e.measure != measure) continue;
    for (const auto& kv : split(e.params, ';')) {
      if (kv == needle) {
        out.insert(e.id);
        break;
      }
    }
  }
  return out;
}

void GroundTruth::save_csv(const std::filesystem::path& path) const {
  std::string out = "measure,id,params\n";
  for (const auto& e : entries) {
    const std::string f[] = {e.measure, e.id, e.params};
    out += csv_row(f);
  }
  write_text_file(path, out);
}

GroundTruth GroundTruth::load_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  GroundTruth t;
  if (!std::getline(in, line) || line != "measure,id,params") {
    throw std::runtime_error("unexpected ground truth header in " + path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = parse_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("malformed ground truth row: " + line);
    t.entries.push_back({f[0], f[1], f[2]});
  }
  return t;
}

SynthResult generate(const SynthSpec& spec) { return Generator(spec).run(); }

void write_synth(const SynthResult& r, const std::filesystem::path& dir) {
  export_jsonl(r.corpus, dir / "corpus.jsonl");
  r.truth.save_csv(dir / "truth.csv");
}

void export_openalex_jsonl(const SynthResult& r, const std::filesystem::path& path) {
  constexpr std::string_view kPrefix = "https://openalex.org/";
  auto oid = [&](std::string_view id, char kind) { return std::string(kPrefix) + kind + std::string(id); };
  std::string out;
  for (const auto& p : r.corpus.records()) {
    json j;
    j["id"] = oid(p.paper_id, 'W');
    j["publication_year"] = p.year;
    j["type"] = p.is_review ? "review" : "article";
    j["language"] = p.language;
    if (p.citation_count) j["cited_by_count"] = *p.citation_count;
    json concepts = json::array();
    for (const auto& k : p.keywords) concepts.push_back({{"display_name", k}, {"level", 2}, {"score", 0.5}});
    j["concepts"] = std::move(concepts);
    json refs = json::array();
    for (const auto& ref : p.references) refs.push_back(oid(ref, 'W'));
    j["referenced_works"] = std::move(refs);
    json ships = json::array();
    for (const auto& a : p.authors) {
      json insts = json::array();
      for (const auto& c : a.countries) insts.push_back({{"display_name", "institute " + c}, {"country_code", c}});
      ships.push_back({{"author_position", a.position == 0 ? "first" : "middle"},
                       {"author", {{"id", oid(a.author_id, 'A')}, {"display_name", a.author_id}}},
                       {"institutions", std::move(insts)},
                       {"is_corresponding", a.is_corresponding}});
    }
    j["authorships"] = std::move(ships);
    if (!p.fields.empty()) j["primary_topic"] = {{"field", {{"display_name", p.fields.front()}}}};
    auto v = r.venues.find(p.paper_id);
    if (v != r.venues.end()) j["primary_location"] = {{"source", {{"display_name", v->second}}}};
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

namespace fixtures {

SynthSpec null_corpus(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.first_year = 2003;
  s.last_year = 2012;
  s.fields = 2;
  s.clusters_per_field = 8;
  s.papers_per_field_year = 300;
  return s;
}

SynthSpec standard(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.first_year = 2000;
  s.last_year = 2014;
  s.fields = 3;
  s.clusters_per_field = 10;
  s.papers_per_field_year = 800;
  s.disruptive_fraction = 0.01;
  s.consolidating_fraction = 0.01;
  // Each field gets one cluster that appears in 2010 with its own team and
  // converges over the following years. Core papers stay near 5% of the
  // field-year while the area is detectable.
  const double rates[] = {0.5, 0.45, 0.55};
  const char* staff[] = {"US", "CN", "DE"};
  for (int f = 0; f < 3; ++f) {
    EmergentPlant e;
    e.field = f;
    e.onset = 2010;
    e.a = 15;
    e.b = rates[f];
    e.members_per_paper = 12;
    e.host_mentions = 2;
    e.staff_country = staff[f];
    s.emergent.push_back(e);
  }
  return s;
}

// No plants. Mean prescience should stay within three standard errors of
// zero, the error taken over field-year means (roughly +-0.15 nats).
SynthSpec stationary(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.first_year = 2003;
  s.last_year = 2012;
  s.fields = 2;
  s.clusters_per_field = 10;
  s.papers_per_field_year = 600;
  return s;
}

SynthSpec merging_peaks(std::uint64_t seed) {
  SynthSpec s = stationary(seed);
  // A handful of papers announce each change: more would teach the
  // publication-year model the very combination being scored.
  MergePlant m;
  m.field = 0;
  m.year = 2010;
  m.planted_fraction = 0.015;
  s.merges.push_back(m);
  DivergePlant d;
  d.field = 1;
  d.year = 2010;
  d.planted_fraction = 0.015;
  d.early_fraction = 0.2;
  s.diverges.push_back(d);
  return s;
}

SynthSpec planted_citation(std::uint64_t seed) {
  SynthSpec s = stationary(seed);
  s.clusters_per_field = 12;
  for (int f = 0; f < s.fields; ++f) {
    for (int k = 0; k < 6; ++k) {
      MergePlant m;
      m.field = f;
      m.cluster_a = 2 * k;
      m.cluster_b = 2 * k + 1;
      m.year = 2005 + k;
      m.planted_fraction = 0.06;
      m.later_fraction = 0.15;
      m.later_years = 2;
      m.citation_boost = 3.0;
      s.merges.push_back(m);
    }
  }
  return s;
}

SynthSpec national_vocabulary(std::uint64_t seed) {
  SynthSpec s = stationary(seed);
  NationalPlant n;
  n.country = "SE";
  n.field = 0;
  n.year = 2010;
  s.national.push_back(n);
  return s;
}

SynthSpec mini_corpus(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.first_year = 2008;
  s.last_year = 2019;
  s.fields = 2;
  s.clusters_per_field = 4;
  s.papers_per_field_year = 40;
  s.authors_per_cluster = 20;
  s.review_fraction = 0.12;
  s.non_english_fraction = 0.03;
  s.disruptive_fraction = 0.02;
  EmergentPlant e;
  e.field = 0;
  e.onset = 2013;
  e.a = 1.01;
  e.b = 0.45;
  e.host_mentions = 2;
  e.members_per_paper = 4;
  s.emergent.push_back(e);
  return s;
}

SynthSpec scaled(std::size_t papers, std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.first_year = 2010;
  s.last_year = 2019;
  const int years = s.last_year - s.first_year + 1;
  s.fields = std::max<int>(1, static_cast<int>(papers / 20000));
  s.clusters_per_field = 20;
  s.papers_per_field_year = std::max(1, static_cast<int>(papers / static_cast<std::size_t>(years * s.fields)));
  return s;
}

}  // namespace fixtures

std::vector<DetectorRow> evaluate_detectors(const std::map<std::string, std::set<std::string>>& tags,
                                            const std::map<std::string, std::map<std::string, double>>& scores,
                                            const GroundTruth& truth, const std::set<std::string>& universe) {
  auto check = [&](const std::string& id, std::string_view what) {
    if (!universe.contains(id)) throw std::invalid_argument(std::string(what) + " id not in corpus: " + id);
  };
  for (const auto& e : truth.entries) {
    if (e.measure != "emergent_area") check(e.id, "planted");
  }
  std::vector<DetectorRow> rows;
  for (const auto& [measure, tagged] : tags) {
    for (const auto& id : tagged) check(id, "tagged");
    const auto planted = truth.ids(measure);
    DetectorRow row;
    row.measure = measure;
    row.tagged = tagged.size();
    row.planted = planted.size();
    for (const auto& id : tagged) row.hits += planted.contains(id);
    row.precision = tagged.empty() ? 0.0 : static_cast<double>(row.hits) / static_cast<double>(tagged.size());
    row.recall = planted.empty() ? 0.0 : static_cast<double>(row.hits) / static_cast<double>(planted.size());
    auto s = scores.find(measure);
    if (s != scores.end()) {
      std::vector<double> pos, neg;
      for (const auto& [id, v] : s->second) {
        check(id, "scored");
        (planted.contains(id) ? pos : neg).push_back(v);
      }
      if (!pos.empty() && !neg.empty()) row.auc = rank_auc(pos, neg);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace frontier
