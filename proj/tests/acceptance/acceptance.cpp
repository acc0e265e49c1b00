// Acceptance suite: one pass/fail line per criterion.
//
//   frontier_acceptance               run everything
//   frontier_acceptance --criterion 5 run one
//
// Scratch output goes to ./acceptance_work/<criterion>.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frontier/disruption.hpp"
#include "frontier/emergence.hpp"
#include "frontier/ingest.hpp"
#include "frontier/pipeline.hpp"
#include "frontier/prescience.hpp"
#include "frontier/report.hpp"
#include "frontier/synthgen.hpp"
#include "frontier/util.hpp"

using namespace frontier;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::current_path() / "acceptance_work" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Walks per keyword raised so each keyword is visited often enough for the
// embedding to separate clusters on the synthetic fixtures.
PipelineConfig fixture_config(const SynthResult& r, const fs::path& dir) {
  write_synth(r, dir / "synth");
  PipelineConfig cfg;
  cfg.corpus = dir / "synth" / "corpus.jsonl";
  cfg.workdir = dir / "work";
  cfg.walks_per_keyword = 10;
  return cfg;
}

std::map<std::string, std::string> parse_params(const std::string& s) {
  std::map<std::string, std::string> out;
  for (const auto& kv : split(s, ';')) {
    const auto eq = kv.find('=');
    if (eq != std::string::npos) out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

// ---- 1: disruption index against set algebra ----

using Edge = std::pair<std::string, std::string>;

struct Graph {
  std::vector<std::pair<std::string, int>> papers;
  std::vector<Edge> edges;
};

Graph random_graph(std::mt19937_64& rng) {
  Graph g;
  const int n = 2 + static_cast<int>(rng() % 49);
  for (int i = 0; i < n; ++i) g.papers.push_back({"n" + std::to_string(i), 1990 + static_cast<int>(rng() % 15)});
  const int m = static_cast<int>(rng() % static_cast<unsigned>(n * 5));
  for (int e = 0; e < m; ++e) {
    const auto a = rng() % static_cast<unsigned>(n), b = rng() % static_cast<unsigned>(n);
    g.edges.push_back({g.papers[a].first, g.papers[b].first});
  }
  return g;
}

struct Counts {
  std::optional<double> d;
  std::uint32_t nf = 0, nb = 0, nr = 0;
};

Counts set_algebra(const Graph& g, const std::string& focal) {
  std::map<std::string, int> year(g.papers.begin(), g.papers.end());
  std::map<std::string, std::set<std::string>> refs;
  for (const auto& [a, b] : g.edges) {
    if (a != b) refs[a].insert(b);
  }
  const int y0 = year[focal];
  const auto& back = refs[focal];
  std::set<std::string> cite_focal, cite_back, later;
  for (const auto& [p, y] : g.papers) {
    if (p != focal && y > y0 && y <= y0 + 5) later.insert(p);
  }
  for (const auto& p : later) {
    const auto& pr = refs[p];
    if (pr.contains(focal)) cite_focal.insert(p);
    for (const auto& x : back) {
      if (pr.contains(x)) cite_back.insert(p);
    }
  }
  std::set<std::string> both, only_focal, only_back;
  std::set_intersection(cite_focal.begin(), cite_focal.end(), cite_back.begin(), cite_back.end(),
                        std::inserter(both, both.end()));
  std::set_difference(cite_focal.begin(), cite_focal.end(), cite_back.begin(), cite_back.end(),
                      std::inserter(only_focal, only_focal.end()));
  std::set_difference(cite_back.begin(), cite_back.end(), cite_focal.begin(), cite_focal.end(),
                      std::inserter(only_back, only_back.end()));
  Counts c;
  c.nf = static_cast<std::uint32_t>(only_focal.size());
  c.nb = static_cast<std::uint32_t>(both.size());
  c.nr = static_cast<std::uint32_t>(only_back.size());
  if (!back.empty() && !cite_focal.empty()) {
    c.d = (static_cast<double>(c.nf) - static_cast<double>(c.nb)) / static_cast<double>(c.nf + c.nb + c.nr);
  }
  return c;
}

Outcome disruption_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::size_t checked = 0, mismatches = 0, defined = 0, limit_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto g = random_graph(rng);
    const CitationGraph cg(g.papers, g.edges);
    for (const auto& [id, _] : g.papers) {
      const auto s = cd_index(cg, id);
      const auto o = set_algebra(g, id);
      ++checked;
      const bool same = s.n_f == o.nf && s.n_b == o.nb && s.n_r == o.nr && s.d_value.has_value() == o.d.has_value() &&
                        (!o.d || *s.d_value == *o.d);
      mismatches += !same;
      if (!s.d_value) continue;
      ++defined;
      limit_violations += (*s.d_value == 1.0) != (s.n_f > 0 && s.n_b == 0 && s.n_r == 0);
      limit_violations += (*s.d_value == -1.0) != (s.n_b > 0 && s.n_f == 0 && s.n_r == 0);
    }
  }

  // The two limits built directly: every citer ignores the predecessors, or
  // every citer cites them too and nobody cites them alone.
  std::size_t built_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const int refs = 1 + static_cast<int>(rng() % 5), citers = 1 + static_cast<int>(rng() % 10);
    Graph eclipse, consolidate;
    for (Graph* g : {&eclipse, &consolidate}) {
      g->papers.push_back({"f", 2000});
      for (int i = 0; i < refs; ++i) {
        g->papers.push_back({"r" + std::to_string(i), 1995});
        g->edges.push_back({"f", "r" + std::to_string(i)});
      }
      for (int i = 0; i < citers; ++i) {
        const auto c = "c" + std::to_string(i);
        g->papers.push_back({c, 2001 + static_cast<int>(rng() % 5)});
        g->edges.push_back({c, "f"});
        if (g == &consolidate) {
          for (int j = 0; j < refs; ++j) g->edges.push_back({c, "r" + std::to_string(j)});
        }
      }
    }
    const auto e = cd_index(CitationGraph(eclipse.papers, eclipse.edges), "f");
    const auto c = cd_index(CitationGraph(consolidate.papers, consolidate.edges), "f");
    built_bad += !(e.d_value && *e.d_value == 1.0);
    built_bad += !(c.d_value && *c.d_value == -1.0);
  }

  const double secs = seconds_since(t0);
  return {mismatches == 0 && limit_violations == 0 && built_bad == 0 && defined > 0 && secs < 10.0,
          fmt("%zu focal papers (%zu defined), %zu mismatches, %zu limit violations, %zu constructed limits wrong, "
              "%.2f s (limit 10 s)",
              checked, defined, mismatches, limit_violations, built_bad, secs)};
}

// ---- 2: propensity and novelty against direct summation ----

struct RandomModel {
  FactorModel model;
  std::vector<std::vector<double>> theta;
  std::vector<double> r;
};

RandomModel random_model(std::mt19937_64& rng) {
  const int n = 2 + static_cast<int>(rng() % 40);
  const int dims = 1 + static_cast<int>(rng() % 40);
  std::gamma_distribution<double> conc(std::uniform_real_distribution<double>(0.2, 3.0)(rng), 1.0);
  std::lognormal_distribution<double> sal(0.0, 1.0);
  RandomModel m;
  std::vector<std::string> nodes;
  std::vector<double> flat;
  for (int i = 0; i < n; ++i) {
    nodes.push_back("n" + std::to_string(i));
    std::vector<double> row(static_cast<std::size_t>(dims));
    double sum = 0.0;
    for (auto& x : row) sum += (x = conc(rng) + 1e-6);
    for (auto& x : row) x /= sum;
    flat.insert(flat.end(), row.begin(), row.end());
    m.theta.push_back(row);
    m.r.push_back(sal(rng));
  }
  m.model = FactorModel(2000, Variant::Content, dims, nodes, flat, m.r);
  return m;
}

double direct_proximity(const RandomModel& m, const std::vector<std::size_t>& h) {
  double total = 0.0;
  for (std::size_t d = 0; d < m.theta[0].size(); ++d) {
    double prod = 1.0;
    for (auto i : h) prod *= m.theta[i][d];
    total += prod;
  }
  return total;
}

bool close(double got, double want, double tol) {
  return std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
}

Outcome propensity_novelty() {
  std::mt19937_64 rng(202);
  std::size_t bad_prop = 0, bad_nov = 0, bad_single = 0, bad_uniform = 0, bad_chain = 0, chains = 0;
  double worst = 0.0, worst_ulps = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto m = random_model(rng);
    const auto n = m.theta.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 8);
    const std::vector<std::size_t> h(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<std::string> names;
    double sal = 1.0;
    for (auto i : h) {
      names.push_back("n" + std::to_string(i));
      sal *= m.r[i];
    }
    const double prox = direct_proximity(m, h);
    const double got_prop = m.model.propensity(names);
    const double rel = std::fabs(got_prop - prox * sal) / (prox * sal);
    worst = std::max(worst, rel);
    bad_prop += rel > 1e-12;
    const auto nov = m.model.novelty(names);
    const double want_nov = k == 1 ? 0.0 : -std::log(prox);
    bad_nov += !close(nov.value, want_nov, 1e-12) || nov.capped;
    if (k == 1) bad_single += nov.value != 0.0;

    // Adding nodes can only shrink the proximity mass.
    ++chains;
    std::vector<std::string> chain;
    double last_prox = INFINITY, last_nov = -INFINITY;
    for (std::size_t j = 0; j < std::min<std::size_t>(n, 10); ++j) {
      chain.push_back("n" + std::to_string(order[j]));
      const double p = m.model.proximity(chain);
      const double v = m.model.novelty(chain).value;
      if (p > last_prox * (1 + 1e-12) || v < last_nov - 1e-12) {
        ++bad_chain;
        break;
      }
      last_prox = p;
      last_nov = v;
    }
  }

  for (int dims = 1; dims <= 200; ++dims) {
    const std::vector<double> flat(2 * static_cast<std::size_t>(dims), 1.0 / dims);
    const FactorModel u(2000, Variant::Content, dims, {"a", "b"}, flat, {1.0, 1.0});
    const std::vector<std::string> pair = {"a", "b"}, one = {"a"};
    // 1/D is rarely representable, so "exact" means agreement to the oracle
    // tolerance; the worst distance in ulps is reported alongside.
    const double want = std::log(static_cast<double>(dims)), got = u.novelty(pair).value;
    bad_uniform += !close(got, want, 1e-12);
    if (dims > 1) worst_ulps = std::max(worst_ulps, std::fabs(got - want) / (std::nextafter(want, INFINITY) - want));
    bad_single += u.novelty(one).value != 0.0;
  }

  const bool pass = bad_prop + bad_nov + bad_single + bad_uniform + bad_chain == 0;
  return {pass, fmt("10000 instances: %zu propensity / %zu novelty mismatches (worst rel %.2e), %zu singleton, "
                    "%zu uniform ln D (worst %.0f ulp), %zu/%zu chains non-monotone",
                    bad_prop, bad_nov, worst, bad_single, bad_uniform, worst_ulps, bad_chain, chains)};
}

// ---- 3: factor model discrimination ----

Outcome factor_auc() {
  const auto t0 = Clock::now();
  const auto r = generate(fixtures::standard());
  const int year = r.corpus.year_range()->second;
  const auto view = r.corpus.window(year, 5);
  auto combos = combinations(view, Variant::Content);
  for (auto& c : combos) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::set<std::vector<std::string>> distinct;
  for (const auto& c : combos) {
    if (c.size() >= 2) distinct.insert(c);
  }
  std::vector<std::vector<std::string>> pool(distinct.begin(), distinct.end());
  std::mt19937_64 rng(303);
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::set<std::vector<std::string>> held(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(pool.size() / 10));
  std::vector<std::vector<std::string>> train;
  for (const auto& c : combos) {
    if (!held.contains(c)) train.push_back(c);
  }
  const auto model = fit_factor_model(train, FactorFitConfig{}, year, Variant::Content);

  std::vector<double> pos, neg;
  const auto nodes = model.nodes();
  for (const auto& h : held) {
    if (!std::all_of(h.begin(), h.end(), [&](const auto& k) { return model.contains(k); })) continue;
    pos.push_back(model.propensity(h));
    std::set<std::string> pick;
    while (pick.size() < h.size()) pick.insert(nodes[rng() % nodes.size()]);
    const std::vector<std::string> random(pick.begin(), pick.end());
    neg.push_back(model.propensity(random));
  }
  const double auc = rank_auc(pos, neg);
  const double secs = seconds_since(t0);
  return {auc >= 0.90 && secs < 300.0,
          fmt("AUC %.4f over %zu held-out combinations (need >= 0.90), %.1f s (limit 300 s)", auc, pos.size(), secs)};
}

// ---- 4: exponential fit recovery ----

Outcome exponential_fit() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ub(-0.5, 1.0), ua(1.0, 10.0), uc(0.0, 10.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> err;
  int flagged = 0;
  for (int i = 0; i < 500; ++i) {
    const double a = ua(rng), b = ub(rng), c = uc(rng);
    std::vector<double> y(5), lin(5);
    for (int t = 0; t < 5; ++t) y[static_cast<std::size_t>(t)] = (a * std::exp(b * t) + c) * (1.0 + noise(rng));
    const auto fit = frequency_growth(y);
    err.push_back(std::fabs(fit.b - b));
    // A straight line over the same range.
    for (int t = 0; t < 5; ++t) lin[static_cast<std::size_t>(t)] = (y[0] + (y[4] - y[0]) * t / 4.0) * (1.0 + noise(rng));
    flagged += frequency_growth(lin).r2 < fit.r2;
  }
  std::nth_element(err.begin(), err.begin() + 250, err.end());
  const double median = err[250];
  const double frac = flagged / 500.0;
  return {median <= 0.05 && frac >= 0.90,
          fmt("median |b_hat - b| %.4f (need <= 0.05), linear below exponential R2 in %.1f%% (need >= 90%%)", median,
              100 * frac)};
}

// ---- 5: planted emergence ----

Outcome planted_emergence() {
  const auto t0 = Clock::now();
  const auto dir = scratch("05_planted_emergence");
  const auto r = generate(fixtures::standard());
  Pipeline p(fixture_config(r, dir));
  for (Stage s : {Stage::Ingest, Stage::Hypergraph, Stage::Walks, Stage::Embed, Stage::Emergence}) p.run(s);
  const auto areas = read_area_rows(p.artifact("emergence/areas.csv"));

  // A planted area counts as found when a selected area in its field is
  // centred on one of its keywords after onset.
  std::size_t planted_areas = 0, found = 0;
  std::set<std::pair<std::string, int>> selected_cells;
  for (const auto& e : r.truth.entries) {
    if (e.measure != "emergent_area") continue;
    ++planted_areas;
    const auto params = parse_params(e.params);
    const auto& field = params.at("field");
    const int onset = std::stoi(params.at("onset"));
    std::set<std::string> kws;
    for (const auto& [name, list] : r.cluster_keywords) {
      if (!list.empty() && list.front() == e.id) kws.insert(list.begin(), list.end());
    }
    bool hit = false;
    for (const auto& a : areas) {
      if (a.selected && a.field == field && a.year >= onset && kws.contains(a.central)) {
        hit = true;
        selected_cells.insert({a.field, a.year});
      }
    }
    found += hit;
  }
  const double area_recall = planted_areas ? static_cast<double>(found) / static_cast<double>(planted_areas) : 0.0;

  // Papers are judged in the field-years where the planted area was selected.
  const auto planted = r.truth.ids("emergent_paper");
  std::size_t truth_n = 0, tagged_n = 0, hits = 0;
  for (const auto& row : read_emergence_rows(p.artifact("emergence/papers.csv"))) {
    if (!selected_cells.contains({row.field, row.year})) continue;
    const bool is_planted = planted.contains(row.paper_id);
    truth_n += is_planted;
    tagged_n += row.tagged;
    hits += is_planted && row.tagged;
  }
  const double recall = truth_n ? static_cast<double>(hits) / static_cast<double>(truth_n) : 0.0;
  const double precision = tagged_n ? static_cast<double>(hits) / static_cast<double>(tagged_n) : 0.0;
  const double secs = seconds_since(t0);
  return {area_recall >= 0.8 && recall >= 0.8 && precision >= 0.5 && secs < 600.0,
          fmt("area recall %.2f (%zu/%zu, need >= 0.8); papers over %zu field-years: recall %.3f (need >= 0.8), "
              "precision %.3f (need >= 0.5); %.0f s (limit 600 s)",
              area_recall, found, planted_areas, selected_cells.size(), recall, precision, secs)};
}

// ---- 6: planted prescience ----

struct TagRecall {
  std::size_t planted = 0, hit = 0;
  double recall() const { return planted ? static_cast<double>(hit) / static_cast<double>(planted) : 0.0; }
};

Outcome planted_prescience() {
  const auto dir = scratch("06_planted_prescience");
  const auto merging = generate(fixtures::merging_peaks());
  auto cfg = fixture_config(merging, dir / "merging");
  Pipeline p(cfg);
  p.run(Stage::Ingest);
  p.run(Stage::Prescience);
  const auto prescient = merging.truth.ids("prescient"), declining = merging.truth.ids("declining");
  std::map<Variant, std::pair<TagRecall, TagRecall>> rec;
  for (Variant v : cfg.variants) {
    for (const auto& row : read_prescience_rows(p.artifact("prescience/scores_" + std::string(to_string(v)) + ".csv"))) {
      auto& [pr, de] = rec[v];
      if (prescient.contains(row.paper_id)) {
        ++pr.planted;
        pr.hit += row.prescient;
      }
      if (declining.contains(row.paper_id)) {
        ++de.planted;
        de.hit += row.declining;
      }
    }
  }
  const auto& [pres, decl] = rec[Variant::Content];
  const auto& [cpres, cdecl] = rec[Variant::Context];

  const auto stationary = generate(fixtures::stationary());
  auto scfg = fixture_config(stationary, dir / "stationary");
  scfg.variants = {Variant::Content};
  Pipeline s(scfg);
  s.run(Stage::Ingest);
  s.run(Stage::Prescience);
  std::map<std::pair<std::string, int>, std::pair<double, int>> cells;
  for (const auto& row : read_prescience_rows(s.artifact("prescience/scores_content.csv"))) {
    auto& [sum, n] = cells[{row.field, row.year}];
    sum += row.prescience;
    ++n;
  }
  std::vector<double> means;
  for (const auto& [_, c] : cells) means.push_back(c.first / c.second);
  const double k = static_cast<double>(means.size());
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / k;
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double band = means.size() > 1 ? 3.0 * std::sqrt(ss / (k - 1)) / std::sqrt(k) : 0.0;

  const bool pass = pres.recall() >= 0.8 && decl.recall() >= 0.8 && means.size() > 1 && std::fabs(mean) <= band;
  return {pass, fmt("content: prescient %zu/%zu, declining %zu/%zu (need >= 0.8); context %zu/%zu, %zu/%zu; "
                    "stationary mean %.4f within +-%.4f over %zu field-years",
                    pres.hit, pres.planted, decl.hit, decl.planted, cpres.hit, cpres.planted, cdecl.hit,
                    cdecl.planted, mean, band, means.size())};
}

// ---- 7: robustness battery ----

template <class Row, class Score>
FieldYearScores field_year_scores(const std::vector<Row>& rows, Score score) {
  FieldYearScores out;
  for (const auto& r : rows) {
    if (auto s = score(r)) out[{r.field, r.year}].push_back({r.paper_id, *s});
  }
  return out;
}

Outcome robustness_battery() {
  const auto dir = scratch("07_robustness_battery");
  const auto r = generate(fixtures::national_vocabulary());
  Pipeline p(fixture_config(r, dir));
  p.run_all();

  std::vector<std::string> notes;
  bool pass = true;

  // Nestedness, recomputed here per field-year.
  std::map<std::string, std::pair<FieldYearScores, bool>> measures;
  measures["emergence"] = {field_year_scores(read_emergence_rows(p.artifact("emergence/papers.csv")),
                                             [](const auto& x) { return std::optional<double>(x.distance); }),
                           false};
  for (const char* v : {"content", "context"}) {
    measures[std::string(v) + "_prescience"] = {
        field_year_scores(read_prescience_rows(p.artifact("prescience/scores_" + std::string(v) + ".csv")),
                          [](const auto& x) { return std::optional<double>(x.prescience); }),
        true};
  }
  measures["disruption"] = {field_year_scores(read_disruption_rows(p.artifact("disruption/scores.csv")),
                                              [](const auto& x) { return x.d; }),
                            true};
  std::size_t cells = 0, broken = 0;
  for (const auto& [name, m] : measures) {
    const auto& [scores, higher] = m;
    for (const auto& [cell, list] : scores) {
      const FieldYearScores one = {{cell, list}};
      const auto t1 = tag_field_years(one, 0.01, higher), t5 = tag_field_years(one, 0.05, higher),
                 t10 = tag_field_years(one, 0.10, higher);
      ++cells;
      broken += !std::includes(t5.begin(), t5.end(), t1.begin(), t1.end()) ||
                !std::includes(t10.begin(), t10.end(), t5.begin(), t5.end());
    }
  }
  std::size_t flagged_rows = 0;
  {
    const auto text = read_text_file(p.artifact("sweep/nested.csv"));
    for (const auto& line : split(text, '\n')) {
      if (line.empty() || line[0] == '#' || line.starts_with("measure")) continue;
      flagged_rows += parse_csv_line(line).back() != "1";
    }
  }
  pass = pass && broken == 0 && flagged_rows == 0 && cells > 0;
  notes.push_back(fmt("nestedness: %zu/%zu field-year cells broken, %zu sweep rows not nested", broken, cells,
                      flagged_rows));

  // Attribution strategies.
  double any_max = 0.0, unanimous_max = 0.0;
  std::size_t strategies = 0;
  for (auto strategy : kAllStrategies) {
    const auto path = p.artifact("report/attribution/series_" + std::string(to_string(strategy)) + ".csv");
    if (!fs::exists(path)) continue;
    const auto series = read_series_csv(path);
    if (series.empty()) continue;
    ++strategies;
    std::map<std::pair<Measure, int>, double> sums;
    for (const auto& s : series) {
      for (const auto& [y, pt] : s.years) sums[{s.measure, y}] += pt.share;
    }
    double mx = 0.0;
    for (const auto& [_, v] : sums) mx = std::max(mx, v);
    if (strategy == AttributionStrategy::AnyAuthor) any_max = mx;
    if (strategy == AttributionStrategy::Unanimous) unanimous_max = mx;
  }
  pass = pass && strategies == 5 && any_max > 1.0 && unanimous_max <= 1.0 + 1e-9;
  notes.push_back(fmt("%zu/5 strategies; largest share sum any %.3f, unanimous %.6f", strategies, any_max,
                      unanimous_max));

  // Dropping one country's papers from training.
  std::string country = "SE";
  for (const auto& e : r.truth.entries) {
    if (e.measure == "national") {
      country = parse_params(e.params).at("country");
      break;
    }
  }
  const auto ex = p.exclusion_rerun(country);
  auto mean_rate = [&](const std::vector<CountrySeries>& series, std::set<int>& years) {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : series) {
      if (s.measure != Measure::ContentPrescience || s.country != country) continue;
      for (const auto& [y, pt] : s.years) {
        years.insert(y);
        sum += pt.rate;
        ++n;
      }
    }
    return n ? sum / n : NAN;
  };
  std::set<int> fy, ey;
  const double full = mean_rate(ex.full, fy), excluded = mean_rate(ex.excluded, ey);
  pass = pass && std::isfinite(full) && std::isfinite(excluded) && excluded < full;
  notes.push_back(fmt("%s content-prescience rate %.4f -> %.4f when excluded", country.c_str(), full, excluded));

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass, detail};
}

// ---- 8: citation percentile curve ----

Outcome citation_curve() {
  const auto dir = scratch("08_citation_curve");
  const auto r = generate(fixtures::planted_citation());
  auto cfg = fixture_config(r, dir);
  cfg.variants = {Variant::Content};
  Pipeline p(cfg);
  p.run(Stage::Ingest);
  p.run(Stage::Prescience);
  std::vector<PaperScorePair> pairs;
  for (const auto& row : read_prescience_rows(p.artifact("prescience/scores_content.csv"))) {
    pairs.push_back({row.paper_id, row.s_pub, row.prescience});
  }
  const auto corpus = p.analysis_corpus();

  auto above = [&](std::size_t bins, std::size_t& total) {
    std::size_t n = 0;
    total = 0;
    for (const auto& pt : prescience_citation_curve(pairs, corpus, bins).points) {
      if (pt.percentile < 90.0 || !pt.surprise_fraction || !pt.prescience_fraction) continue;
      ++total;
      n += *pt.prescience_fraction > *pt.surprise_fraction;
    }
    return n;
  };
  std::size_t coarse_total = 0, fine_total = 0;
  const auto coarse = above(20, coarse_total);
  const auto fine = above(100, fine_total);
  return {coarse_total > 0 && coarse == coarse_total,
          fmt("prescience above surprise in %zu/%zu five-point bins at >= 90th percentile (%zu/%zu one-point bins)",
              coarse, coarse_total, fine, fine_total)};
}

// ---- 9: determinism and performance ----

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_text_file(e.path());
  }
  return out;
}

Outcome determinism_performance() {
  const auto dir = scratch("09_determinism_performance");
  const auto conf = fs::path(FRONTIER_TEST_DATA) / "mini.conf";
  std::vector<double> times;
  for (const char* run : {"a", "b"}) {
    auto cfg = PipelineConfig::load(conf);
    cfg.workdir = dir / run;
    cfg.mode = ExecutionMode::Deterministic;
    const auto t0 = Clock::now();
    Pipeline(cfg).run_all();
    times.push_back(seconds_since(t0));
  }
  const auto a = tree_contents(dir / "a"), b = tree_contents(dir / "b");
  std::size_t differ = 0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    differ += it == b.end() || it->second != v;
  }
  differ += b.size() > a.size() ? b.size() - a.size() : 0;

  const auto big = generate(fixtures::scaled(100000));
  write_synth(big, dir / "scaled");
  PipelineConfig cfg;
  cfg.corpus = dir / "scaled" / "corpus.jsonl";
  cfg.workdir = dir / "scaled_work";
  cfg.mode = ExecutionMode::Parallel;
  Pipeline p(cfg);
  p.run(Stage::Ingest);
  const auto t0 = Clock::now();
  for (Stage s : {Stage::Hypergraph, Stage::Walks, Stage::Embed}) p.run(s);
  const double big_secs = seconds_since(t0);

  const double slowest = std::max(times[0], times[1]);
  return {differ == 0 && !a.empty() && slowest < 600.0 && big_secs < 1800.0,
          fmt("mini all: %zu files, %zu differ, %.1f s / %.1f s (limit 600 s); 100k papers hypergraph+walks+embed "
              "%.0f s on %u threads (limit 1800 s)",
              a.size(), differ, times[0], times[1], big_secs, cfg.effective_threads())};
}

// ---- 10: open-data smoke ----

Outcome open_data_smoke() {
  const auto dir = scratch("10_open_data_smoke");
  const auto sample = generate(fixtures::scaled(50000));
  export_openalex_jsonl(sample, dir / "works.jsonl");
  PipelineConfig cfg;
  cfg.corpus = dir / "works.jsonl";
  cfg.schema = std::string(kSchemaOpenAlex);
  cfg.workdir = dir / "work";
  Pipeline p(cfg);
  p.run_all();

  std::size_t files = 0, points = 0, bad = 0;
  std::set<Measure> seen;
  auto check = [&](const fs::path& path) {
    ++files;
    const auto text = read_text_file(path);
    bad += !text.starts_with("# config_hash=") ||
           text.find("measure,country,year,share,rate,count,ci_low,ci_high\n") == std::string::npos;
    for (const auto& s : read_series_csv(path)) {
      seen.insert(s.measure);
      // Citations carry a mean per paper with a normal interval; every
      // other measure is a proportion with a Wilson interval.
      const double top = s.measure == Measure::Citations ? INFINITY : 1.0;
      for (const auto& [y, pt] : s.years) {
        ++points;
        const bool ok = std::isfinite(pt.share) && pt.share >= 0 && pt.share <= 1 && std::isfinite(pt.rate) &&
                        pt.rate >= 0 && pt.rate <= top && pt.count >= 0 && pt.ci_low >= 0 && pt.ci_high <= top &&
                        pt.ci_low <= pt.rate + 1e-12 && pt.rate <= pt.ci_high + 1e-12;
        bad += !ok;
      }
    }
  };
  check(p.artifact("report/series.csv"));
  for (auto s : kAllStrategies) check(p.artifact("report/attribution/series_" + std::string(to_string(s)) + ".csv"));
  const std::size_t measures = seen.size();
  return {bad == 0 && points > 0 && measures == 7,
          fmt("%zu records ingested, %zu series files, %zu points over %zu measures, %zu malformed",
              p.records().size(), files, points, measures, bad)};
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string which;
  app.add_option("--criterion", which, "run a single criterion by number");
  CLI11_PARSE(app, argc, argv);
  // Decimal even with a leading zero ("08").
  const int only = which.empty() ? 0 : std::stoi(which, nullptr, 10);

  const std::vector<Criterion> all = {
      {1, "disruption_oracle", disruption_oracle},
      {2, "propensity_novelty", propensity_novelty},
      {3, "factor_auc", factor_auc},
      {4, "exponential_fit", exponential_fit},
      {5, "planted_emergence", planted_emergence},
      {6, "planted_prescience", planted_prescience},
      {7, "robustness_battery", robustness_battery},
      {8, "citation_curve", citation_curve},
      {9, "determinism_performance", determinism_performance},
      {10, "open_data_smoke", open_data_smoke},
  };

  bool ok = true, ran = false;
  for (const auto& c : all) {
    if (only && c.number != only) continue;
    ran = true;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %02d %s: %s %s (%.1f s)\n", c.number, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  if (!ran) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return ok ? 0 : 1;
}
