#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "frontier/disruption.hpp"
#include "frontier/util.hpp"
#include "helpers.hpp"

using namespace frontier;

namespace {

using Edge = std::pair<std::string, std::string>;

struct RandomGraph {
  std::vector<std::pair<std::string, int>> papers;
  std::vector<Edge> edges;
};

RandomGraph random_graph(std::mt19937_64& rng) {
  RandomGraph g;
  const int n = 2 + static_cast<int>(rng() % 49);
  for (int i = 0; i < n; ++i) g.papers.push_back({"p" + std::to_string(i), 2000 + static_cast<int>(rng() % 12)});
  const int m = static_cast<int>(rng() % static_cast<unsigned>(n * 4));
  for (int e = 0; e < m; ++e) {
    const auto a = rng() % static_cast<unsigned>(n), b = rng() % static_cast<unsigned>(n);
    // Mostly backwards in time, with the odd anomaly.
    if (g.papers[a].second >= g.papers[b].second || rng() % 10 == 0) g.edges.push_back({g.papers[a].first, g.papers[b].first});
  }
  return g;
}

struct Oracle {
  std::optional<double> d;
  int nf = 0, nb = 0, nr = 0;
};

// Plain set algebra over the edge list.
Oracle oracle(const RandomGraph& g, const std::string& focal, int window) {
  std::map<std::string, int> year(g.papers.begin(), g.papers.end());
  std::map<std::string, std::set<std::string>> refs;
  for (const auto& [a, b] : g.edges) {
    if (a != b) refs[a].insert(b);
  }
  const int y0 = year[focal];
  const auto& fr = refs[focal];
  Oracle o;
  bool citers = false;
  for (const auto& [p, y] : g.papers) {
    if (p == focal || y <= y0 || y > y0 + window) continue;
    const auto& pr = refs[p];
    const bool f = pr.contains(focal);
    bool r = false;
    for (const auto& x : fr) r = r || pr.contains(x);
    citers = citers || f;
    if (f && !r) ++o.nf;
    if (f && r) ++o.nb;
    if (!f && r) ++o.nr;
  }
  if (!fr.empty() && citers) o.d = static_cast<double>(o.nf - o.nb) / (o.nf + o.nb + o.nr);
  return o;
}

CitationGraph build(const RandomGraph& g) { return CitationGraph(g.papers, g.edges); }

}  // namespace

TEST_SUITE("disruption") {
  TEST_CASE("pure disruption") {
    std::vector<std::pair<std::string, int>> papers = {{"r", 1990}, {"f", 2000}, {"a", 2001}, {"b", 2002}, {"c", 2003}};
    std::vector<Edge> edges = {{"f", "r"}, {"a", "f"}, {"b", "f"}, {"c", "f"}};
    auto s = cd_index(CitationGraph(papers, edges), "f");
    CHECK(s.n_f == 3);
    CHECK(s.n_b == 0);
    CHECK(s.n_r == 0);
    CHECK(*s.d_value == 1.0);
  }

  TEST_CASE("pure consolidation") {
    std::vector<std::pair<std::string, int>> papers = {{"r", 1990}, {"f", 2000}, {"a", 2001}, {"b", 2002}};
    std::vector<Edge> edges = {{"f", "r"}, {"a", "f"}, {"a", "r"}, {"b", "f"}, {"b", "r"}};
    CHECK(*cd_index(CitationGraph(papers, edges), "f").d_value == -1.0);
  }

  TEST_CASE("mixed seven-node graph") {
    std::vector<std::pair<std::string, int>> papers = {{"r1", 1995}, {"r2", 1996}, {"f", 2000}, {"a", 2001},
                                                       {"b", 2002},  {"c", 2003},  {"d", 2004}};
    std::vector<Edge> edges = {{"f", "r1"}, {"f", "r2"}, {"a", "f"},  {"b", "f"},
                               {"c", "f"},  {"c", "r1"}, {"d", "r2"}, {"d", "r1"}};
    auto s = cd_index(CitationGraph(papers, edges), "f");
    CHECK(s.n_f == 2);
    CHECK(s.n_b == 1);
    CHECK(s.n_r == 1);
    CHECK(*s.d_value == doctest::Approx(0.25));
  }

  TEST_CASE("undefined scores and window edges") {
    std::vector<std::pair<std::string, int>> papers = {{"r", 1990}, {"f", 2000}, {"same", 2000},
                                                       {"late", 2006}, {"edge", 2005}, {"lonely", 2001}};
    std::vector<Edge> edges = {{"f", "r"}, {"same", "f"}, {"late", "f"}, {"f", "f"}, {"f", "r"}};
    CitationGraph g(papers, edges);
    CHECK(g.edge_count() == 3);
    auto s = cd_index(g, "f");
    CHECK_FALSE(s.d_value.has_value());
    CHECK_FALSE(cd_index(g, "lonely").d_value.has_value());
    DisruptionOptions same;
    same.include_same_year = true;
    CHECK(*cd_index(g, "f", same).d_value == 1.0);
    std::vector<Edge> edges2 = {{"f", "r"}, {"edge", "f"}};
    CHECK(cd_index(CitationGraph(papers, edges2), "f").n_f == 1);
    CHECK_THROWS_AS(cd_index(g, "missing"), std::invalid_argument);
  }

  TEST_CASE("agrees with set algebra on random graphs") {
    std::mt19937_64 rng(17);
    int defined = 0;
    for (int t = 0; t < 1000; ++t) {
      auto rg = random_graph(rng);
      auto g = build(rg);
      for (const auto& [id, _] : rg.papers) {
        auto s = cd_index(g, id);
        auto o = oracle(rg, id, 5);
        CHECK(s.n_f == static_cast<std::uint32_t>(o.nf));
        CHECK(s.n_b == static_cast<std::uint32_t>(o.nb));
        CHECK(s.n_r == static_cast<std::uint32_t>(o.nr));
        REQUIRE(s.d_value.has_value() == o.d.has_value());
        if (s.d_value) {
          ++defined;
          CHECK(*s.d_value == doctest::Approx(*o.d).epsilon(1e-12));
          CHECK(*s.d_value >= -1.0);
          CHECK(*s.d_value <= 1.0);
          CHECK((*s.d_value == 1.0) == (s.n_b == 0 && s.n_r == 0 && s.n_f > 0));
          CHECK((*s.d_value == -1.0) == (s.n_f == 0 && s.n_r == 0 && s.n_b > 0));
        }
      }
    }
    CHECK(defined > 1000);
  }

  TEST_CASE("larger windows never shrink the counts") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 200; ++t) {
      auto rg = random_graph(rng);
      auto g = build(rg);
      for (const auto& [id, _] : rg.papers) {
        DisruptionScore prev;
        for (int w = 1; w <= 8; ++w) {
          DisruptionOptions opt;
          opt.window = w;
          auto s = cd_index(g, id, opt);
          CHECK(s.n_f >= prev.n_f);
          CHECK(s.n_b >= prev.n_b);
          CHECK(s.n_r >= prev.n_r);
          prev = s;
        }
      }
    }
  }

  TEST_CASE("corpus graph ignores references outside the corpus") {
    std::vector<PaperRecord> recs;
    auto f = testing::paper("f", 2000, {"a"});
    f.references = {"r", "ghost"};
    auto r = testing::paper("r", 1999, {"a"});
    auto c = testing::paper("c", 2001, {"a"});
    c.references = {"f", "ghost"};
    Corpus corpus({f, r, c});
    CitationGraph g(corpus);
    CHECK(g.edge_count() == 2);
    CHECK(*cd_index(g, "f").d_value == 1.0);
  }

  TEST_CASE("tagging") {
    std::vector<DisruptionScore> s;
    for (int i = 0; i < 40; ++i) {
      DisruptionScore d;
      d.paper_id = "p" + std::to_string(i);
      d.d_value = static_cast<double>(i) / 40.0;
      s.push_back(d);
    }
    auto top = tag_disruptive(s, 0.05);
    std::sort(top.begin(), top.end());
    CHECK(top == std::vector<std::string>{"p38", "p39"});
    for (auto& d : s) d.d_value = -1.0;
    s[7].d_value = 1.0;
    s.push_back({"undefined", std::nullopt});
    CHECK(tag_disruptive(s, 0.01) == std::vector<std::string>{"p7"});
  }

  TEST_CASE("random tags match a brute-force pipeline") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
      auto rg = random_graph(rng);
      auto g = build(rg);
      std::vector<DisruptionScore> scores;
      std::vector<std::pair<double, std::string>> defined;
      for (const auto& [id, _] : rg.papers) {
        scores.push_back(cd_index(g, id));
        auto o = oracle(rg, id, 5);
        if (o.d) defined.push_back({*o.d, id});
      }
      auto tags = tag_disruptive(scores, 0.10);
      std::set<std::string> got(tags.begin(), tags.end()), want;
      if (!defined.empty()) {
        std::sort(defined.rbegin(), defined.rend());
        const auto k = top_count(0.10, defined.size());
        if (k > 0) {
          const double cut = defined[k - 1].first;
          for (const auto& [d, id] : defined) {
            if (d >= cut) want.insert(id);
          }
        }
      }
      CHECK(got == want);
    }
  }
}
