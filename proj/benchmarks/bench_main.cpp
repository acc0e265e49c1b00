#include <algorithm>

#include <benchmark/benchmark.h>

#include "frontier/disruption.hpp"
#include "frontier/embedding.hpp"
#include "frontier/hypergraph.hpp"
#include "frontier/prescience.hpp"
#include "frontier/synthgen.hpp"

using namespace frontier;

namespace {

const SynthResult& corpus() {
  static const SynthResult r = generate(fixtures::scaled(20000));
  return r;
}

const Hypergraph& graph() {
  static const Hypergraph g = build_hypergraph(corpus().corpus.all());
  return g;
}

const std::vector<std::vector<std::string>>& walk_text() {
  static const auto text = [] {
    WalkConfig cfg;
    cfg.seed = 1;
    std::vector<std::vector<std::string>> out;
    for (const auto& w : generate_walks(graph(), cfg, 5000)) out.push_back(walk_tokens(graph(), w));
    return out;
  }();
  return text;
}

const EmbeddingSpace& space() {
  static const EmbeddingSpace s = [] {
    TrainConfig cfg;
    cfg.dim = 64;
    cfg.epochs = 1;
    return train_embedding(walk_text(), cfg, 2000).space;
  }();
  return s;
}

void BM_BuildHypergraph(benchmark::State& state) {
  const auto view = corpus().corpus.all();
  for (auto _ : state) benchmark::DoNotOptimize(build_hypergraph(view));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(view.size()));
}
BENCHMARK(BM_BuildHypergraph)->Unit(benchmark::kMillisecond);

void BM_Walks(benchmark::State& state) {
  WalkConfig cfg;
  cfg.seed = 3;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_walks(graph(), cfg, n));
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.length);
}
BENCHMARK(BM_Walks)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SkipGram(benchmark::State& state) {
  TrainConfig cfg;
  cfg.dim = static_cast<int>(state.range(0));
  cfg.epochs = 1;
  const auto& walks = walk_text();
  for (auto _ : state) benchmark::DoNotOptimize(train_embedding(walks, cfg, 2000));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(walks.size()));
}
BENCHMARK(BM_SkipGram)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_NearestNeighbors(benchmark::State& state) {
  const auto& s = space();
  const auto center = walk_text().front().front();
  for (auto _ : state) benchmark::DoNotOptimize(nearest_neighbors(s, center, 24, KindFilter::Keyword));
}
BENCHMARK(BM_NearestNeighbors)->Unit(benchmark::kMicrosecond);

void BM_CdIndex(benchmark::State& state) {
  static const CitationGraph g(corpus().corpus);
  const auto records = corpus().corpus.records();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cd_index(g, records[i].paper_id));
    i = (i + 1) % records.size();
  }
}
BENCHMARK(BM_CdIndex)->Unit(benchmark::kMicrosecond);

void BM_Novelty(benchmark::State& state) {
  const auto combos = combinations(corpus().corpus.all(), Variant::Content);
  FactorFitConfig cfg;
  cfg.epochs = 2;
  static const FactorModel m = fit_factor_model(combos, cfg, 2000, Variant::Content);
  std::vector<std::vector<std::string>> known;
  for (const auto& c : combos) {
    if (std::all_of(c.begin(), c.end(), [](const auto& k) { return m.contains(k); })) known.push_back(c);
    if (known.size() == 1000) break;
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.novelty(known[i]));
    i = (i + 1) % known.size();
  }
}
BENCHMARK(BM_Novelty)->Unit(benchmark::kNanosecond);

}  // namespace

BENCHMARK_MAIN();
