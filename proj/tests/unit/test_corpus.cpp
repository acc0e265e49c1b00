#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "frontier/corpus.hpp"
#include "helpers.hpp"

using namespace frontier;
using testing::paper;

namespace {

std::set<std::string> S(std::initializer_list<std::string> l) { return l; }

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("attribution examples") {
    auto p = paper("p", 2000, {"a"}, {{"x", {"US"}}, {"y", {"CN"}}});
    CHECK(attribute_countries(p, AttributionStrategy::AnyAuthor) == S({"CN", "US"}));
    auto solo = paper("q", 2000, {"a"}, {{"x", {"US"}, true}});
    for (auto s : kAllStrategies) CHECK(attribute_countries(solo, s) == S({"US"}));
    auto three = paper("r", 2000, {"a"}, {{"x", {"US"}}, {"y", {"US"}}, {"z", {"CN"}}});
    CHECK(attribute_countries(three, AttributionStrategy::Unanimous).empty());
    CHECK(attribute_countries(three, AttributionStrategy::FirstAuthor) == S({"US"}));
    CHECK(attribute_countries(three, AttributionStrategy::LastAuthor) == S({"CN"}));
  }

  TEST_CASE("dual affiliations credit every country") {
    auto p = paper("p", 2000, {"a"}, {{"x", {"US", "CN"}, true}, {"y", {"DE"}}});
    for (auto s : {AttributionStrategy::FirstAuthor, AttributionStrategy::CorrespondingAuthor}) {
      CHECK(attribute_countries(p, s) == S({"CN", "US"}));
    }
  }

  TEST_CASE("missing countries and corresponding authors") {
    auto p = paper("p", 2000, {"a"}, {{"x", {}}, {"y", {}}});
    CHECK(attribute_countries(p, AttributionStrategy::AnyAuthor) == S({std::string(kUnknownCountry)}));
    CHECK(attribute_countries(p, AttributionStrategy::CorrespondingAuthor).empty());
    CHECK(attribute_countries(paper("n", 2000), AttributionStrategy::AnyAuthor).empty());
  }

  TEST_CASE("attribution subset invariants on random bylines") {
    std::mt19937_64 rng(17);
    const std::vector<std::string> pool = {"US", "CN", "DE", "JP"};
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<testing::Author> authors;
      const int n = 1 + static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) {
        testing::Author a{"a" + std::to_string(i), {}, rng() % 3 == 0};
        const int nc = static_cast<int>(rng() % 3);
        for (int c = 0; c < nc; ++c) a.countries.push_back(pool[rng() % pool.size()]);
        authors.push_back(a);
      }
      auto p = paper("p", 2000, {"k"}, authors);
      const auto any = attribute_countries(p, AttributionStrategy::AnyAuthor);
      const auto una = attribute_countries(p, AttributionStrategy::Unanimous);
      CHECK(una.size() <= 1);
      for (auto s : kAllStrategies) {
        const auto r = attribute_countries(p, s);
        // UNKNOWN is only credited when no author has a known country.
        std::set<std::string> known;
        for (const auto& c : r) {
          if (c != kUnknownCountry) known.insert(c);
        }
        std::set<std::string> any_known;
        for (const auto& c : any) {
          if (c != kUnknownCountry) any_known.insert(c);
        }
        CHECK(std::includes(any_known.begin(), any_known.end(), known.begin(), known.end()));
        if (!una.empty() && !r.empty()) CHECK(std::includes(r.begin(), r.end(), una.begin(), una.end()));
      }
    }
  }

  TEST_CASE("window boundaries") {
    std::vector<PaperRecord> recs;
    for (int y = 2014; y <= 2021; ++y) recs.push_back(paper("p" + std::to_string(y), y, {"a"}));
    Corpus c(recs);
    auto w = c.window(2020, 5);
    std::vector<int> years;
    for (const auto& p : w) years.push_back(p.year);
    CHECK(years == std::vector<int>{2016, 2017, 2018, 2019, 2020});
    CHECK(c.window(2018, 1).size() == 1);
    CHECK(c.window(2018, 1)[0].year == 2018);
  }

  TEST_CASE("window partition on the mini corpus") {
    const auto c = testing::mini_corpus();
    const auto [lo, hi] = *c.year_range();
    for (int end = lo; end <= hi; ++end) {
      for (int span : {1, 3, 5}) {
        std::size_t sum = 0;
        std::set<std::size_t> seen;
        for (int y = end - span + 1; y <= end; ++y) {
          auto v = c.window(y, 1);
          sum += v.size();
          for (auto i : v.indices()) CHECK(seen.insert(i).second);
        }
        auto w = c.window(end, span);
        CHECK(w.size() == sum);
        CHECK(std::set<std::size_t>(w.indices().begin(), w.indices().end()) == seen);
      }
    }
  }

  TEST_CASE("index lookups match a linear scan") {
    const auto c = testing::mini_corpus();
    CHECK(c.size() == 1000);
    for (std::size_t i = 0; i < c.size(); i += 37) {
      const auto& p = c.records()[i];
      CHECK(c.find(p.paper_id) == &p);
      CHECK(*c.index_of(p.paper_id) == i);
    }
    CHECK(c.find("nope") == nullptr);
    std::map<int, std::size_t> by_year;
    std::map<std::string, std::size_t> by_field, by_kw;
    for (const auto& p : c.records()) {
      ++by_year[p.year];
      for (const auto& f : p.fields) ++by_field[f];
      std::set<std::string> kws(p.keywords.begin(), p.keywords.end());
      for (const auto& k : kws) ++by_kw[k];
    }
    for (const auto& [y, n] : by_year) CHECK(c.by_year(y).size() == n);
    for (const auto& [f, n] : by_field) CHECK(c.by_field(f).size() == n);
    for (const auto& [k, n] : by_kw) CHECK(c.by_keyword(k).size() == n);
  }

  TEST_CASE("filter_articles") {
    auto art = paper("a", 2000, {"x"});
    auto rev = paper("r", 2000, {"x"});
    rev.is_review = true;
    auto zh = paper("z", 2000, {"x"});
    zh.language = "zh";
    Corpus c({art, rev, zh});
    auto f = filter_articles(c);
    REQUIRE(f.size() == 1);
    CHECK(f.records()[0].paper_id == "a");
    CHECK(filter_articles(f) == f);
    CHECK(filter_articles(c, true).size() == 2);
    CHECK(filter_articles(c, false, {"en", "zh"}).size() == 2);
  }

  TEST_CASE("filter_articles on the mini corpus matches a count") {
    const auto c = testing::mini_corpus();
    std::size_t expected = 0, reviews = 0;
    for (const auto& p : c.records()) {
      if (p.is_review) ++reviews;
      if (!p.is_review && p.language == "en") ++expected;
    }
    CHECK(reviews > 60);  // roughly 12% planted
    CHECK(filter_articles(c).size() == expected);
  }

  TEST_CASE("exclude_country drops any paper touching the country") {
    Corpus c({paper("a", 2000, {"x"}, {{"u", {"US"}}}), paper("b", 2000, {"x"}, {{"u", {"US"}}, {"v", {"SE"}}}),
              paper("c", 2000, {"x"}, {{"v", {"SE", "NO"}}})});
    auto e = exclude_country(c, "SE");
    REQUIRE(e.size() == 1);
    CHECK(e.records()[0].paper_id == "a");
    CHECK(exclude_country(c, "FR") == c);
  }

  TEST_CASE("duplicate ids are rejected") {
    CHECK_THROWS_AS(Corpus({paper("a", 2000), paper("a", 2001)}), std::invalid_argument);
  }

  TEST_CASE("taxonomy fallback") {
    auto t = FieldTaxonomy::parse("label cs\nlabel bio\n# comment\nmap neural net = cs\n");
    CHECK(t.has_label("cs"));
    auto p = paper("p", 2000, {"neural net", "x"}, {}, {});
    t.apply(p);
    CHECK(p.fields == std::vector<std::string>{"cs"});
    auto q = paper("q", 2000, {"neural net"}, {}, {"bio"});
    t.apply(q);
    CHECK(q.fields == std::vector<std::string>{"bio"});
  }
}
