#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace frontier {

inline constexpr std::string_view kUnknownCountry = "UNKNOWN";

struct AuthorRef {
  std::string author_id;
  std::set<std::string> countries;  // empty means UNKNOWN
  int position = 0;
  bool is_corresponding = false;

  bool operator==(const AuthorRef&) const = default;
};

struct PaperRecord {
  std::string paper_id;
  int year = 0;
  std::vector<std::string> keywords;    // content nodes, normalized
  std::vector<std::string> ref_venues;  // context nodes, normalized
  std::vector<std::string> references;
  std::vector<AuthorRef> authors;
  // A paper is indexed under every listed field.
  std::vector<std::string> fields;
  bool is_review = false;
  std::string language = "en";
  std::optional<std::int64_t> citation_count;

  bool operator==(const PaperRecord&) const = default;

  bool in_field(std::string_view f) const;
};

enum class AttributionStrategy { AnyAuthor, FirstAuthor, LastAuthor, CorrespondingAuthor, Unanimous };

inline constexpr AttributionStrategy kAllStrategies[] = {
    AttributionStrategy::AnyAuthor, AttributionStrategy::FirstAuthor, AttributionStrategy::LastAuthor,
    AttributionStrategy::CorrespondingAuthor, AttributionStrategy::Unanimous};

std::string_view to_string(AttributionStrategy s);
AttributionStrategy parse_attribution(std::string_view s);

// Countries credited with a paper under a strategy. An empty result means the
// paper is unattributable under that strategy.
std::set<std::string> attribute_countries(const PaperRecord& p, AttributionStrategy s);

class CorpusView;

// Immutable, cheaply copyable collection of records with lookup indexes.
class Corpus {
 public:
  Corpus();
  // Records must have unique ids; throws std::invalid_argument otherwise.
  explicit Corpus(std::vector<PaperRecord> records);

  std::span<const PaperRecord> records() const;
  std::size_t size() const { return records().size(); }
  bool empty() const { return size() == 0; }

  const PaperRecord* find(std::string_view paper_id) const;
  std::optional<std::size_t> index_of(std::string_view paper_id) const;

  std::span<const std::size_t> by_year(int year) const;
  std::span<const std::size_t> by_field(std::string_view field) const;
  std::span<const std::size_t> by_keyword(std::string_view keyword) const;
  std::span<const std::size_t> by_author(std::string_view author_id) const;

  std::vector<int> years() const;
  std::vector<std::string> field_labels() const;
  std::optional<std::pair<int, int>> year_range() const;

  CorpusView all() const;
  // Records with end_year - span < year <= end_year.
  CorpusView window(int end_year, int span = 5) const;

  bool operator==(const Corpus& other) const;

 private:
  struct Store;
  std::shared_ptr<const Store> store_;
  friend class CorpusView;
};

// Immutable subset of a corpus in corpus order. Keeps the corpus alive.
class CorpusView {
 public:
  CorpusView() = default;

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const PaperRecord& operator[](std::size_t i) const;
  std::span<const std::size_t> indices() const { return indices_; }
  const Corpus& corpus() const { return corpus_; }

  class iterator {
   public:
    using value_type = PaperRecord;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const CorpusView* v, std::size_t i) : view_(v), i_(i) {}
    const PaperRecord& operator*() const { return (*view_)[i_]; }
    const PaperRecord* operator->() const { return &(*view_)[i_]; }
    iterator& operator++() {
      ++i_;
      return *this;
    }
    iterator operator++(int) {
      auto t = *this;
      ++i_;
      return t;
    }
    bool operator==(const iterator& o) const { return i_ == o.i_; }

   private:
    const CorpusView* view_ = nullptr;
    std::size_t i_ = 0;
  };
  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, indices_.size()}; }

  CorpusView filter_year(int year) const;
  CorpusView filter_field(std::string_view field) const;
  // Materialize as a standalone corpus.
  Corpus to_corpus() const;

 private:
  friend class Corpus;
  CorpusView(Corpus c, std::vector<std::size_t> idx) : corpus_(std::move(c)), indices_(std::move(idx)) {}
  Corpus corpus_;
  std::vector<std::size_t> indices_;
};

// Drops reviews (unless allowed) and records whose language is not listed.
Corpus filter_articles(const Corpus& c, bool allow_reviews = false,
                       const std::set<std::string>& languages = {"en"});

// Drops every record with at least one author affiliated with `country`.
Corpus exclude_country(const Corpus& c, std::string_view country);

// Label list plus keyword -> field fallback used when a record has no field.
class FieldTaxonomy {
 public:
  // Text format, one directive per line, '#' comments:
  //   label <field label>
  //   map <keyword> = <field label>
  static FieldTaxonomy load(const std::filesystem::path& path);
  static FieldTaxonomy parse(std::string_view text);

  void add_label(std::string label);
  void add_mapping(std::string keyword, std::string label);

  bool has_label(std::string_view label) const;
  std::span<const std::string> labels() const { return labels_; }
  // Fills `fields` from the keyword fallback when the record has none.
  void apply(PaperRecord& p) const;

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::string, std::less<>> keyword_field_;
};

}  // namespace frontier
