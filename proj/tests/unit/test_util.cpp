#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "frontier/util.hpp"

using namespace frontier;

TEST_SUITE("util") {
  TEST_CASE("top_count is a guarded ceiling") {
    CHECK(top_count(0.05, 100) == 5);
    CHECK(top_count(0.01, 200) == 2);
    CHECK(top_count(0.01, 201) == 3);
    CHECK(top_count(0.1, 30) == 3);  // 0.1 * 30 is 3.0000000000000004
    CHECK(top_count(0.0, 100) == 0);
    CHECK(top_count(1.0, 7) == 7);
    CHECK(top_count(0.05, 0) == 0);
  }

  TEST_CASE("select_top includes boundary ties") {
    const std::vector<double> s = {1, 5, 3, 5, 2, 5, 0, 0, 0, 0};
    auto idx = select_top(s, 0.1);  // one slot, three tied at 5
    std::sort(idx.begin(), idx.end());
    CHECK(idx == std::vector<std::size_t>{1, 3, 5});
    auto low = select_bottom(s, 0.1);
    CHECK(low.size() == 4);
    CHECK(select_top(s, 0.0).empty());
    CHECK(select_bottom(std::vector<double>{}, 0.5).empty());
  }

  TEST_CASE("select_top agrees with a sort oracle and nests") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng() % 60;
      std::vector<double> s(n);
      for (auto& v : s) v = static_cast<double>(rng() % 10);
      for (double pct : {0.01, 0.05, 0.1, 0.5}) {
        auto idx = select_top(s, pct);
        std::vector<double> sorted = s;
        std::sort(sorted.rbegin(), sorted.rend());
        const std::size_t k = top_count(pct, n);
        const std::size_t expected =
            k == 0 ? 0 : static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) { return v >= sorted[k - 1]; }));
        CHECK(idx.size() == expected);
      }
      auto a = select_top(s, 0.05), b = select_top(s, 0.1);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }

  TEST_CASE("rank_auc matches pairwise counting") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> pos(1 + rng() % 20), neg(1 + rng() % 20);
      for (auto& v : pos) v = static_cast<double>(rng() % 7);
      for (auto& v : neg) v = static_cast<double>(rng() % 7);
      double wins = 0;
      for (double p : pos) {
        for (double q : neg) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
      }
      CHECK(rank_auc(pos, neg) == doctest::Approx(wins / static_cast<double>(pos.size() * neg.size())).epsilon(1e-12));
    }
  }

  TEST_CASE("csv quoting round-trips") {
    const std::vector<std::string> row = {"plain", "a,b", "say \"hi\"", "", "x;y"};
    auto line = csv_row(row);
    CHECK(line.back() == '\n');
    line.pop_back();
    CHECK(parse_csv_line(line) == row);
  }

  TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng);
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
  }

  TEST_CASE("keyword normalization") {
    CHECK(normalize_keyword("  Machine   LEARNING ") == "machine learning");
    CHECK(normalize_keyword("a\tb") == "a b");
    CHECK(to_upper("us") == "US");
    CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  }

  TEST_CASE("derived streams are independent of call order") {
    auto a = derived_rng(9, 3);
    auto b = derived_rng(9, 4);
    auto a2 = derived_rng(9, 3);
    CHECK(a() == a2());
    CHECK(derived_rng(9, 3)() != b());
  }

  TEST_CASE("fnv1a reference value") {
    // Published FNV-1a 64-bit test vector for "a".
    Fnv1a h;
    h.update("a");
    CHECK(h.digest() == 0xaf63dc4c8601ec8cULL);
  }
}
