#include "frontier/corpus.hpp"

#include <algorithm>
#include <stdexcept>

#include "frontier/util.hpp"

namespace frontier {

bool PaperRecord::in_field(std::string_view f) const {
  return std::find(fields.begin(), fields.end(), f) != fields.end();
}

std::string_view to_string(AttributionStrategy s) {
  switch (s) {
    case AttributionStrategy::AnyAuthor: return "any";
    case AttributionStrategy::FirstAuthor: return "first";
    case AttributionStrategy::LastAuthor: return "last";
    case AttributionStrategy::CorrespondingAuthor: return "corresponding";
    case AttributionStrategy::Unanimous: return "unanimous";
  }
  return "any";
}

AttributionStrategy parse_attribution(std::string_view s) {
  for (auto strategy : kAllStrategies) {
    if (to_string(strategy) == s) return strategy;
  }
  throw std::invalid_argument("unknown attribution strategy: " + std::string(s));
}

namespace {

std::set<std::string> known_or_unknown(const std::set<std::string>& countries) {
  std::set<std::string> out;
  for (const auto& c : countries) {
    if (c != kUnknownCountry) out.insert(c);
  }
  if (out.empty()) out.insert(std::string(kUnknownCountry));
  return out;
}

}  // namespace

std::set<std::string> attribute_countries(const PaperRecord& p, AttributionStrategy s) {
  if (p.authors.empty()) return {};
  switch (s) {
    case AttributionStrategy::AnyAuthor: {
      std::set<std::string> all;
      for (const auto& a : p.authors) all.insert(a.countries.begin(), a.countries.end());
      return known_or_unknown(all);
    }
    case AttributionStrategy::FirstAuthor: {
      auto it = std::min_element(p.authors.begin(), p.authors.end(),
                                 [](const AuthorRef& a, const AuthorRef& b) { return a.position < b.position; });
      return known_or_unknown(it->countries);
    }
    case AttributionStrategy::LastAuthor: {
      auto it = std::max_element(p.authors.begin(), p.authors.end(),
                                 [](const AuthorRef& a, const AuthorRef& b) { return a.position < b.position; });
      return known_or_unknown(it->countries);
    }
    case AttributionStrategy::CorrespondingAuthor: {
      const AuthorRef* best = nullptr;
      for (const auto& a : p.authors) {
        if (a.is_corresponding && (!best || a.position < best->position)) best = &a;
      }
      if (!best) return {};
      return known_or_unknown(best->countries);
    }
    case AttributionStrategy::Unanimous: {
      std::set<std::string> common = known_or_unknown(p.authors.front().countries);
      for (std::size_t i = 1; i < p.authors.size() && !common.empty(); ++i) {
        const auto mine = known_or_unknown(p.authors[i].countries);
        std::set<std::string> next;
        std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
                              std::inserter(next, next.end()));
        common = std::move(next);
      }
      if (common.size() != 1) return {};
      return common;
    }
  }
  return {};
}

struct Corpus::Store {
  std::vector<PaperRecord> records;
  std::unordered_map<std::string, std::size_t> id_index;
  std::map<int, std::vector<std::size_t>> year_index;
  std::map<std::string, std::vector<std::size_t>, std::less<>> field_index;
  std::unordered_map<std::string, std::vector<std::size_t>> keyword_index;
  std::unordered_map<std::string, std::vector<std::size_t>> author_index;
};

Corpus::Corpus() : store_(std::make_shared<Store>()) {}

Corpus::Corpus(std::vector<PaperRecord> records) {
  auto store = std::make_shared<Store>();
  store->records = std::move(records);
  for (std::size_t i = 0; i < store->records.size(); ++i) {
    const auto& r = store->records[i];
    if (!store->id_index.emplace(r.paper_id, i).second) {
      throw std::invalid_argument("duplicate paper_id: " + r.paper_id);
    }
    store->year_index[r.year].push_back(i);
    for (const auto& f : r.fields) store->field_index[f].push_back(i);
    for (const auto& k : r.keywords) store->keyword_index[k].push_back(i);
    for (const auto& a : r.authors) {
      auto& list = store->author_index[a.author_id];
      if (list.empty() || list.back() != i) list.push_back(i);
    }
  }
  store_ = std::move(store);
}

std::span<const PaperRecord> Corpus::records() const { return store_->records; }

const PaperRecord* Corpus::find(std::string_view paper_id) const {
  auto idx = index_of(paper_id);
  return idx ? &store_->records[*idx] : nullptr;
}

std::optional<std::size_t> Corpus::index_of(std::string_view paper_id) const {
  auto it = store_->id_index.find(std::string(paper_id));
  if (it == store_->id_index.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> Corpus::by_year(int year) const {
  auto it = store_->year_index.find(year);
  if (it == store_->year_index.end()) return {};
  return it->second;
}

std::span<const std::size_t> Corpus::by_field(std::string_view field) const {
  auto it = store_->field_index.find(field);
  if (it == store_->field_index.end()) return {};
  return it->second;
}

std::span<const std::size_t> Corpus::by_keyword(std::string_view keyword) const {
  auto it = store_->keyword_index.find(std::string(keyword));
  if (it == store_->keyword_index.end()) return {};
  return it->second;
}

std::span<const std::size_t> Corpus::by_author(std::string_view author_id) const {
  auto it = store_->author_index.find(std::string(author_id));
  if (it == store_->author_index.end()) return {};
  return it->second;
}

std::vector<int> Corpus::years() const {
  std::vector<int> out;
  for (const auto& [y, _] : store_->year_index) out.push_back(y);
  return out;
}

std::vector<std::string> Corpus::field_labels() const {
  std::vector<std::string> out;
  for (const auto& [f, _] : store_->field_index) out.push_back(f);
  return out;
}

std::optional<std::pair<int, int>> Corpus::year_range() const {
  if (store_->year_index.empty()) return std::nullopt;
  return std::make_pair(store_->year_index.begin()->first, store_->year_index.rbegin()->first);
}

CorpusView Corpus::all() const {
  std::vector<std::size_t> idx(size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return CorpusView(*this, std::move(idx));
}

CorpusView Corpus::window(int end_year, int span) const {
  if (span < 1) throw std::invalid_argument("window span must be >= 1");
  std::vector<std::size_t> idx;
  const auto& recs = store_->records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].year > end_year - span && recs[i].year <= end_year) idx.push_back(i);
  }
  return CorpusView(*this, std::move(idx));
}

bool Corpus::operator==(const Corpus& other) const { return store_->records == other.store_->records; }

const PaperRecord& CorpusView::operator[](std::size_t i) const { return corpus_.store_->records[indices_[i]]; }

CorpusView CorpusView::filter_year(int year) const {
  std::vector<std::size_t> idx;
  for (auto i : indices_) {
    if (corpus_.store_->records[i].year == year) idx.push_back(i);
  }
  return CorpusView(corpus_, std::move(idx));
}

CorpusView CorpusView::filter_field(std::string_view field) const {
  std::vector<std::size_t> idx;
  for (auto i : indices_) {
    if (corpus_.store_->records[i].in_field(field)) idx.push_back(i);
  }
  return CorpusView(corpus_, std::move(idx));
}

Corpus CorpusView::to_corpus() const {
  std::vector<PaperRecord> recs;
  recs.reserve(indices_.size());
  for (auto i : indices_) recs.push_back(corpus_.store_->records[i]);
  return Corpus(std::move(recs));
}

Corpus filter_articles(const Corpus& c, bool allow_reviews, const std::set<std::string>& languages) {
  std::vector<PaperRecord> keep;
  for (const auto& r : c.records()) {
    if (r.is_review && !allow_reviews) continue;
    if (!languages.empty() && !languages.contains(r.language)) continue;
    keep.push_back(r);
  }
  return Corpus(std::move(keep));
}

Corpus exclude_country(const Corpus& c, std::string_view country) {
  std::vector<PaperRecord> keep;
  for (const auto& r : c.records()) {
    const bool touches = std::any_of(r.authors.begin(), r.authors.end(), [&](const AuthorRef& a) {
      return a.countries.contains(std::string(country));
    });
    if (!touches) keep.push_back(r);
  }
  return Corpus(std::move(keep));
}

FieldTaxonomy FieldTaxonomy::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

FieldTaxonomy FieldTaxonomy::parse(std::string_view text) {
  FieldTaxonomy tax;
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("label ", 0) == 0) {
      tax.add_label(trim(line.substr(6)));
    } else if (line.rfind("map ", 0) == 0) {
      auto body = line.substr(4);
      auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("taxonomy line " + std::to_string(lineno) + ": expected 'map <keyword> = <label>'");
      }
      tax.add_mapping(normalize_keyword(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } else {
      throw std::invalid_argument("taxonomy line " + std::to_string(lineno) + ": unknown directive");
    }
  }
  return tax;
}

void FieldTaxonomy::add_label(std::string label) {
  if (!has_label(label)) labels_.push_back(std::move(label));
}

void FieldTaxonomy::add_mapping(std::string keyword, std::string label) {
  add_label(label);
  keyword_field_[std::move(keyword)] = std::move(label);
}

bool FieldTaxonomy::has_label(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

void FieldTaxonomy::apply(PaperRecord& p) const {
  if (!p.fields.empty()) return;
  for (const auto& k : p.keywords) {
    auto it = keyword_field_.find(k);
    if (it != keyword_field_.end()) {
      p.fields.push_back(it->second);
      return;
    }
  }
}

}  // namespace frontier
