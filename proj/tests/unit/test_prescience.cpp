#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "frontier/prescience.hpp"
#include "frontier/util.hpp"
#include "helpers.hpp"

using namespace frontier;
using testing::paper;

namespace {

FactorModel random_model(std::size_t n, int dims, std::uint64_t seed, Variant v = Variant::Content) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(0.5, 1.0);
  std::uniform_real_distribution<double> ur(0.1, 3.0);
  std::vector<std::string> nodes;
  std::vector<double> theta, r;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back("n" + std::to_string(i));
    std::vector<double> row(static_cast<std::size_t>(dims));
    double s = 0;
    for (auto& x : row) s += (x = g(rng) + 1e-9);
    for (auto& x : row) theta.push_back(x / s);
    r.push_back(ur(rng));
  }
  return FactorModel(2000, v, dims, nodes, theta, r);
}

FactorModel uniform_model(int dims, std::size_t n = 3) {
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("u" + std::to_string(i));
  return FactorModel(2000, Variant::Content, dims, nodes,
                     std::vector<double>(n * static_cast<std::size_t>(dims), 1.0 / dims), std::vector<double>(n, 1.0));
}

std::vector<std::vector<std::string>> clique_combos(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i < n; ++i) {
    const std::string p = i % 2 ? "a" : "b";
    std::set<std::string> s;
    while (s.size() < 3) s.insert(p + std::to_string(rng() % 6));
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

}  // namespace

TEST_SUITE("prescience") {
  TEST_CASE("propensity and novelty match direct summation") {
    auto m = random_model(30, 7, 1);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 500; ++t) {
      std::set<std::size_t> rows;
      const std::size_t k = 1 + rng() % 5;
      while (rows.size() < k) rows.insert(rng() % 30);
      std::vector<std::string> h;
      for (auto r : rows) h.push_back("n" + std::to_string(r));
      double prox = 0;
      for (int d = 0; d < 7; ++d) {
        double prod = 1;
        for (auto r : rows) prod *= m.theta(r)[static_cast<std::size_t>(d)];
        prox += prod;
      }
      double sal = 1;
      for (auto r : rows) sal *= m.salience(r);
      CHECK(std::fabs(m.proximity(h) - prox) <= 1e-12 * std::max(1.0, prox));
      CHECK(std::fabs(m.propensity(h) - prox * sal) <= 1e-12 * std::max(1.0, prox * sal));
      const auto nov = m.novelty(h);
      if (k == 1) {
        CHECK(nov.value == 0.0);
      } else {
        CHECK(std::fabs(nov.value + std::log(prox)) <= 1e-12 * std::max(1.0, nov.value));
        CHECK(std::fabs(m.propensity(h) - std::exp(-nov.value) * sal) <= 1e-9 * m.propensity(h));
      }
    }
  }

  TEST_CASE("simplex and symmetry fixed points") {
    auto m = random_model(5, 4, 3);
    std::vector<std::string> one = {"n2"};
    CHECK(m.proximity(one) == doctest::Approx(1.0).epsilon(1e-12));
    auto u = uniform_model(4);
    std::vector<std::string> pair = {"u0", "u1"};
    CHECK(u.propensity(pair) == doctest::Approx(0.25));
    auto u100 = uniform_model(100);
    CHECK(u100.novelty(pair).value == doctest::Approx(std::log(100.0)).epsilon(1e-12));
    FactorModel hot(2000, Variant::Content, 2, {"x", "y"}, {1, 0, 0, 1}, {1, 1});
    std::vector<std::string> xy = {"x", "y"};
    auto n = hot.novelty(xy);
    CHECK(n.capped);
    CHECK(n.value == doctest::Approx(-std::log(kProximityFloor)));
    std::vector<std::string> bad = {"x", "nope"};
    CHECK_THROWS_AS(hot.novelty(bad), OutOfVocabulary);
  }

  TEST_CASE("novelty grows under node addition and ignores salience") {
    auto m = random_model(40, 6, 4);
    std::vector<double> theta;
    std::vector<std::string> nodes(m.nodes().begin(), m.nodes().end());
    std::vector<double> scaled_r;
    std::mt19937_64 rng(5);
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (double x : m.theta(i)) theta.push_back(x);
      scaled_r.push_back(m.salience(i) * (0.5 + static_cast<double>(rng() % 100) / 50.0));
    }
    FactorModel rescaled(2000, Variant::Content, 6, nodes, theta, scaled_r);
    for (int t = 0; t < 300; ++t) {
      std::vector<std::string> h = {nodes[rng() % 40]};
      double prev = m.novelty(h).value;
      for (int step = 0; step < 5; ++step) {
        const auto next = nodes[rng() % 40];
        if (std::find(h.begin(), h.end(), next) != h.end()) continue;
        h.push_back(next);
        const double nv = m.novelty(h).value;
        CHECK(nv >= prev - 1e-12);
        CHECK(nv >= 0.0);
        prev = nv;
        CHECK(rescaled.novelty(h).value == m.novelty(h).value);
        double factor = 1;
        for (const auto& x : h) factor *= rescaled.salience(rescaled.row(x)) / m.salience(m.row(x));
        CHECK(rescaled.propensity(h) == doctest::Approx(m.propensity(h) * factor).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("two cliques: within beats across") {
    auto combos = clique_combos(6, 600);
    FactorFitConfig fc;
    fc.dims = 2;
    fc.epochs = 40;
    FitDiagnostics diag;
    auto m = fit_factor_model(combos, fc, 2000, Variant::Content, &diag);
    std::set<std::vector<std::string>> distinct(combos.begin(), combos.end());
    CHECK(diag.positives == distinct.size());
    CHECK(diag.epoch_loglik.size() == 40);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (i == j) continue;
        std::vector<std::string> in = {"a" + std::to_string(i), "a" + std::to_string(j)};
        std::vector<std::string> across = {"a" + std::to_string(i), "b" + std::to_string(j)};
        CHECK(m.propensity(in) > m.propensity(across));
      }
    }
  }

  TEST_CASE("a single repeated edge dominates") {
    std::vector<std::vector<std::string>> combos;
    for (int i = 0; i < 50; ++i) combos.push_back({"hot1", "hot2"});
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
      std::string a = "n" + std::to_string(rng() % 30), b = "n" + std::to_string(rng() % 30);
      if (a != b) combos.push_back({a, b});
    }
    FactorFitConfig fc;
    fc.dims = 8;
    auto m = fit_factor_model(combos, fc, 2000, Variant::Content);
    std::vector<std::string> hot = {"hot1", "hot2"};
    const double top = m.propensity(hot);
    const auto nodes = std::vector<std::string>(m.nodes().begin(), m.nodes().end());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        std::vector<std::string> h = {nodes[i], nodes[j]};
        if (h == hot || (h[0] == "hot2" && h[1] == "hot1")) continue;
        CHECK(m.propensity(h) < top);
      }
    }
  }

  TEST_CASE("fitting is deterministic and persists") {
    auto combos = clique_combos(8, 200);
    FactorFitConfig fc;
    fc.dims = 3;
    fc.epochs = 10;
    auto a = fit_factor_model(combos, fc, 2001, Variant::Context);
    auto b = fit_factor_model(combos, fc, 2001, Variant::Context);
    CHECK(a == b);
    auto dir = testing::scratch("fm");
    a.save_binary(dir / "m.bin", "stamp");
    CHECK(FactorModel::load_binary(dir / "m.bin") == a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double s = 0;
      for (double x : a.theta(i)) s += x;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    fc.freeze_salience = true;
    auto frozen = fit_factor_model(combos, fc, 2001, Variant::Context);
    // Frozen salience stays at degree / mean degree.
    std::map<std::string, double> degree;
    for (const auto& c : combos) {
      for (const auto& n : c) degree[n] += 1;
    }
    double mean = 0;
    for (const auto& [_, d] : degree) mean += d;
    mean /= static_cast<double>(degree.size());
    for (const auto& [n, d] : degree) CHECK(frozen.salience(frozen.row(n)) == doctest::Approx(d / mean));
  }

  TEST_CASE("prescience arithmetic and status") {
    SurprisePair sp;
    sp.at_pub.value = 10;
    sp.later.value = 3;
    CHECK(prescience_score("p", sp).prescience == 7);
    sp.later.value = 10;
    CHECK(prescience_score("p", sp).prescience == 0);

    auto m0 = uniform_model(4), m1 = uniform_model(4, 2);
    auto p = paper("p", 2000, {"u0", "u2"});
    CHECK(surprise_pair(m0, m0, p).status == SurpriseStatus::Ok);
    CHECK(surprise_pair(m0, m1, p).status == SurpriseStatus::MissingLater);
    CHECK(surprise_pair(m1, m0, p).status == SurpriseStatus::MissingAtPublication);
    CHECK(surprise_pair(m0, m0, paper("q", 2000, {"u0"})).status == SurpriseStatus::TooSmall);
  }

  TEST_CASE("tagging thresholds") {
    std::vector<PrescienceScore> s;
    for (int i = 0; i < 100; ++i) s.push_back({"p" + std::to_string(i), 0, 0, static_cast<double>(i - 50), false});
    CHECK(tag_prescient(s, 0.05).size() == 5);
    auto p5 = tag_prescient(s, 0.05), p10 = tag_prescient(s, 0.10);
    std::set<std::string> s10(p10.begin(), p10.end());
    for (const auto& id : p5) CHECK(s10.contains(id));
    auto d = tag_declining(s, 0.05);
    CHECK(d.size() == 5);
    for (const auto& id : d) CHECK_FALSE(std::find(p5.begin(), p5.end(), id) != p5.end());
    CHECK(tag_declining(s, 0.0).empty());
  }

  TEST_CASE("content and context are the same machinery") {
    // Keywords mirror venues one-to-one.
    std::vector<PaperRecord> recs;
    std::mt19937_64 rng(9);
    for (int i = 0; i < 300; ++i) {
      auto p = paper("p" + std::to_string(i), 2000, {});
      std::set<int> s;
      while (s.size() < 3) s.insert(static_cast<int>(rng() % 12));
      for (int x : s) {
        p.keywords.push_back("n" + std::to_string(x));
        p.ref_venues.push_back("n" + std::to_string(x));
      }
      recs.push_back(p);
    }
    Corpus c(recs);
    FactorFitConfig fc;
    fc.dims = 4;
    fc.epochs = 5;
    auto content = fit_factor_model(combinations(c.all(), Variant::Content), fc, 2000, Variant::Content);
    auto context = fit_factor_model(combinations(c.all(), Variant::Context), fc, 2000, Variant::Context);
    for (const auto& p : c.records()) {
      auto a = prescience_score(p.paper_id, surprise_pair(content, content, p));
      auto b = prescience_score(p.paper_id, surprise_pair(context, context, p));
      CHECK(a.surprise_at_pub == b.surprise_at_pub);
    }
  }

  TEST_CASE("variant names") {
    CHECK(parse_variant("context") == Variant::Context);
    CHECK(to_string(Variant::Content) == "content");
    CHECK_THROWS_AS(parse_variant("both"), std::invalid_argument);
  }
}
