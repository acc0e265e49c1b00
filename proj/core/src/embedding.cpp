#include "frontier/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "frontier/util.hpp"

namespace frontier {

std::string_view to_string(ExecutionMode m) { return m == ExecutionMode::Parallel ? "parallel" : "deterministic"; }

ExecutionMode parse_mode(std::string_view s) {
  if (s == "deterministic") return ExecutionMode::Deterministic;
  if (s == "parallel") return ExecutionMode::Parallel;
  throw std::invalid_argument("unknown mode: " + std::string(s));
}

EmbeddingSpace::EmbeddingSpace(int year, int dim, std::vector<std::string> tokens, std::vector<float> matrix,
                               std::string trained_on)
    : year_(year), dim_(dim), trained_on_(std::move(trained_on)), tokens_(std::move(tokens)), matrix_(std::move(matrix)) {
  if (dim_ <= 0) throw std::invalid_argument("embedding dim must be positive");
  if (matrix_.size() != tokens_.size() * static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("embedding matrix size does not match node table");
  }
  norms_.resize(tokens_.size());
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    double s = 0.0;
    for (float x : row_vector(r)) s += static_cast<double>(x) * x;
    norms_[r] = std::sqrt(s);
    if (!index_.emplace(tokens_[r], r).second) throw std::invalid_argument("duplicate node " + tokens_[r]);
  }
}

std::size_t EmbeddingSpace::row(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw KeyMissing(std::string(token));
  return it->second;
}

std::vector<std::string> EmbeddingSpace::keywords() const {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    if (kind(r) == NodeKind::Keyword) out.push_back(tokens_[r].substr(2));
  }
  return out;
}

namespace {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated embedding file");
  return v;
}

}  // namespace

void EmbeddingSpace::save_binary(const std::filesystem::path& path, std::string_view stamp) const {
  std::string out;
  put<std::int32_t>(out, year_);
  put<std::int32_t>(out, dim_);
  put<std::uint64_t>(out, tokens_.size());
  for (const auto& t : tokens_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
    out += t;
  }
  out.append(reinterpret_cast<const char*>(matrix_.data()), matrix_.size() * sizeof(float));
  if (!stamp.empty()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(stamp.size()));
    out += stamp;
  }
  write_text_file(path, out);
}

EmbeddingSpace EmbeddingSpace::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read embedding " + path.string());
  const auto year = get<std::int32_t>(in);
  const auto dim = get<std::int32_t>(in);
  const auto count = get<std::uint64_t>(in);
  std::vector<std::string> tokens(count);
  for (auto& t : tokens) {
    t.resize(get<std::uint32_t>(in));
    in.read(t.data(), static_cast<std::streamsize>(t.size()));
  }
  std::vector<float> matrix(count * static_cast<std::size_t>(dim));
  in.read(reinterpret_cast<char*>(matrix.data()), static_cast<std::streamsize>(matrix.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated embedding file " + path.string());
  std::string stamp;
  std::uint32_t len = 0;
  if (in.read(reinterpret_cast<char*>(&len), sizeof(len))) {
    stamp.resize(len);
    in.read(stamp.data(), len);
  }
  return EmbeddingSpace(year, dim, std::move(tokens), std::move(matrix), std::move(stamp));
}

void EmbeddingSpace::save_text(const std::filesystem::path& path) const {
  std::string out;
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    out += csv_escape(tokens_[r]);
    for (float x : row_vector(r)) {
      out.push_back(',');
      out += format_double(static_cast<double>(x));
    }
    out.push_back('\n');
  }
  write_text_file(path, out);
}

namespace {

struct Vocab {
  std::vector<std::string> tokens;  // sorted
  std::vector<std::uint64_t> counts;
};

constexpr float kMaxLogit = 20.0f;

inline float sigmoid(float x) {
  x = std::clamp(x, -kMaxLogit, kMaxLogit);
  return 1.0f / (1.0f + std::exp(-x));
}

class SgnsTrainer {
 public:
  SgnsTrainer(const std::vector<std::vector<std::uint32_t>>& walks, const Vocab& vocab, const TrainConfig& cfg)
      : walks_(walks), vocab_(vocab), cfg_(cfg), dim_(static_cast<std::size_t>(cfg.dim)) {
    const std::size_t n = vocab.tokens.size();
    Rng init = derived_rng(cfg.seed, 0xE1);
    syn0_.resize(n * dim_);
    for (auto& x : syn0_) x = static_cast<float>((uniform_real(init) - 0.5) / static_cast<double>(cfg.dim));
    syn1_.assign(n * dim_, 0.0f);
    build_table();
    for (const auto& w : walks_) total_tokens_ += w.size();
    sample_eval();
  }

  std::vector<double> run() {
    std::vector<double> losses;
    const std::uint64_t budget = total_tokens_ * static_cast<std::uint64_t>(cfg_.epochs);
    processed_ = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      double loss = 0.0;
      std::uint64_t pairs = 0;
      const unsigned threads =
          cfg_.mode == ExecutionMode::Parallel ? std::max(1u, std::min<unsigned>(cfg_.threads, walks_.size())) : 1u;
      if (threads == 1) {
        Rng rng = derived_rng(cfg_.seed, 0x1000 + static_cast<std::uint64_t>(epoch));
        train_range(0, walks_.size(), rng, budget, loss, pairs);
      } else {
        std::vector<double> tl(threads, 0.0);
        std::vector<std::uint64_t> tp(threads, 0);
        {
          std::vector<std::jthread> pool;
          const std::size_t chunk = (walks_.size() + threads - 1) / threads;
          for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
              Rng rng = derived_rng(cfg_.seed, 0x1000 + static_cast<std::uint64_t>(epoch) * 1024 + t);
              const std::size_t b = std::min(walks_.size(), t * chunk);
              const std::size_t e = std::min(walks_.size(), b + chunk);
              train_range(b, e, rng, budget, tl[t], tp[t]);
            });
          }
        }
        loss = std::accumulate(tl.begin(), tl.end(), 0.0);
        pairs = std::accumulate(tp.begin(), tp.end(), std::uint64_t{0});
      }
      losses.push_back(eval_loss());
    }
    return losses;
  }

  std::vector<float> take_vectors() { return std::move(syn0_); }

 private:
  void build_table() {
    double total = 0.0;
    for (auto c : vocab_.counts) total += std::pow(static_cast<double>(c), 0.75);
    const std::size_t size = std::max<std::size_t>(1'000'000, vocab_.counts.size() * 10);
    table_.resize(size);
    std::size_t w = 0;
    double cum = std::pow(static_cast<double>(vocab_.counts[0]), 0.75) / total;
    for (std::size_t i = 0; i < size; ++i) {
      table_[i] = static_cast<std::uint32_t>(w);
      if (static_cast<double>(i + 1) / static_cast<double>(size) > cum && w + 1 < vocab_.counts.size()) {
        ++w;
        cum += std::pow(static_cast<double>(vocab_.counts[w]), 0.75) / total;
      }
    }
  }

  void train_range(std::size_t begin, std::size_t end, Rng& rng, std::uint64_t budget, double& loss,
                   std::uint64_t& pairs) {
    std::vector<float> grad(dim_);
    const double span = cfg_.lr_start - cfg_.lr_end;
    for (std::size_t wi = begin; wi < end; ++wi) {
      const auto& walk = walks_[wi];
      const std::uint64_t done = processed_.fetch_add(walk.size(), std::memory_order_relaxed);
      const double progress = budget ? std::min(1.0, static_cast<double>(done) / static_cast<double>(budget)) : 1.0;
      const auto lr = static_cast<float>(cfg_.lr_start - span * progress);
      const auto n = static_cast<std::ptrdiff_t>(walk.size());
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto shrink = static_cast<std::ptrdiff_t>(uniform_index(rng, static_cast<std::size_t>(cfg_.context_window)));
        const std::ptrdiff_t reach = cfg_.context_window - shrink;
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - reach); j <= std::min(n - 1, i + reach); ++j) {
          if (j == i) continue;
          loss += update(walk[static_cast<std::size_t>(j)], walk[static_cast<std::size_t>(i)], lr, rng, grad);
          ++pairs;
        }
      }
    }
  }

  // Fixed (input, target, negatives) draws so per-epoch losses are comparable;
  // the running training loss is biased by the learning-rate schedule.
  void sample_eval() {
    constexpr std::size_t kEvalPairs = 20000;
    Rng rng = derived_rng(cfg_.seed, 0xE7A1);
    const auto k = static_cast<std::size_t>(cfg_.negatives);
    for (std::size_t s = 0; s < kEvalPairs && !walks_.empty(); ++s) {
      const auto& walk = walks_[uniform_index(rng, walks_.size())];
      if (walk.size() < 2) continue;
      const auto i = uniform_index(rng, walk.size());
      const auto lo = i >= static_cast<std::size_t>(cfg_.context_window) ? i - static_cast<std::size_t>(cfg_.context_window) : 0;
      const auto hi = std::min(walk.size() - 1, i + static_cast<std::size_t>(cfg_.context_window));
      auto j = lo + uniform_index(rng, hi - lo);
      if (j >= i) ++j;
      eval_.push_back(walk[j]);
      eval_.push_back(walk[i]);
      for (std::size_t d = 0; d < k; ++d) eval_.push_back(table_[uniform_index(rng, table_.size())]);
    }
  }

  double eval_loss() const {
    const std::size_t stride = 2 + static_cast<std::size_t>(cfg_.negatives);
    if (eval_.empty()) return 0.0;
    double loss = 0.0;
    for (std::size_t s = 0; s < eval_.size(); s += stride) {
      const float* in = &syn0_[eval_[s] * dim_];
      for (std::size_t d = 1; d < stride; ++d) {
        const auto out_word = eval_[s + d];
        if (d > 1 && out_word == eval_[s + 1]) continue;
        const float* out = &syn1_[out_word * dim_];
        float f = 0.0f;
        for (std::size_t c = 0; c < dim_; ++c) f += in[c] * out[c];
        const double p = sigmoid(f);
        loss -= std::log(std::max(1e-12, d == 1 ? p : 1.0 - p));
      }
    }
    return loss / static_cast<double>(eval_.size() / stride);
  }

  // Context row `input` predicts `target` against sampled negatives.
  double update(std::uint32_t input, std::uint32_t target, float lr, Rng& rng, std::vector<float>& grad) {
    float* in = &syn0_[input * dim_];
    std::fill(grad.begin(), grad.end(), 0.0f);
    double loss = 0.0;
    for (int d = 0; d <= cfg_.negatives; ++d) {
      std::uint32_t out_word;
      float label;
      if (d == 0) {
        out_word = target;
        label = 1.0f;
      } else {
        out_word = table_[uniform_index(rng, table_.size())];
        if (out_word == target) continue;
        label = 0.0f;
      }
      float* out = &syn1_[out_word * dim_];
      float f = 0.0f;
      for (std::size_t k = 0; k < dim_; ++k) f += in[k] * out[k];
      const float p = sigmoid(f);
      loss -= std::log(std::max(1e-12, static_cast<double>(label > 0 ? p : 1.0f - p)));
      const float g = (label - p) * lr;
      for (std::size_t k = 0; k < dim_; ++k) grad[k] += g * out[k];
      for (std::size_t k = 0; k < dim_; ++k) out[k] += g * in[k];
    }
    for (std::size_t k = 0; k < dim_; ++k) in[k] += grad[k];
    return loss;
  }

  const std::vector<std::vector<std::uint32_t>>& walks_;
  const Vocab& vocab_;
  const TrainConfig& cfg_;
  std::size_t dim_;
  std::vector<float> syn0_;
  std::vector<float> syn1_;
  std::vector<std::uint32_t> table_;
  std::vector<std::uint32_t> eval_;  // input, target, negatives per pair
  std::uint64_t total_tokens_ = 0;
  std::atomic<std::uint64_t> processed_{0};
};

}  // namespace

TrainResult train_embedding(const std::vector<std::vector<std::string>>& walks, const TrainConfig& cfg, int year,
                            std::string trained_on) {
  if (cfg.dim <= 0 || cfg.context_window <= 0 || cfg.negatives <= 0 || cfg.epochs <= 0 || cfg.min_count <= 0 ||
      cfg.lr_start <= 0 || cfg.lr_end <= 0) {
    throw std::invalid_argument("train config values must be positive");
  }
  std::map<std::string, std::uint64_t> counts;
  for (const auto& w : walks) {
    for (const auto& t : w) ++counts[t];
  }
  Vocab vocab;
  std::unordered_map<std::string, std::uint32_t> ids;
  for (const auto& [t, c] : counts) {
    if (c < static_cast<std::uint64_t>(cfg.min_count)) continue;
    ids.emplace(t, static_cast<std::uint32_t>(vocab.tokens.size()));
    vocab.tokens.push_back(t);
    vocab.counts.push_back(c);
  }
  if (vocab.tokens.empty()) throw std::invalid_argument("empty walk corpus");

  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(walks.size());
  for (const auto& w : walks) {
    std::vector<std::uint32_t> e;
    e.reserve(w.size());
    for (const auto& t : w) {
      auto it = ids.find(t);
      if (it != ids.end()) e.push_back(it->second);
    }
    if (!e.empty()) encoded.push_back(std::move(e));
  }

  SgnsTrainer trainer(encoded, vocab, cfg);
  TrainResult result;
  result.epoch_loss = trainer.run();
  result.space = EmbeddingSpace(year, cfg.dim, std::move(vocab.tokens), trainer.take_vectors(), std::move(trained_on));
  return result;
}

namespace {

template <class T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine_distance: zero vector");
  const double d = 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(d, 0.0, 2.0);
}

bool kind_matches(const EmbeddingSpace& s, std::size_t r, KindFilter f) {
  if (f == KindFilter::Any) return true;
  return (s.kind(r) == NodeKind::Author) == (f == KindFilter::Author);
}

NeighborList scan(const EmbeddingSpace& s, std::span<const double> query, double query_norm, std::size_t k,
                  KindFilter filter, std::optional<std::size_t> skip) {
  NeighborList result;
  if (k == 0) return result;
  std::vector<std::pair<double, std::size_t>> cands;
  for (std::size_t r = 0; r < s.size(); ++r) {
    if (skip && r == *skip) continue;
    if (!kind_matches(s, r, filter)) continue;
    const auto v = s.row_vector(r);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += query[i] * v[i];
    const double denom = query_norm * s.row_norm(r);
    const double d = denom == 0.0 ? 1.0 : std::clamp(1.0 - dot / denom, 0.0, 2.0);
    cands.emplace_back(d, r);
  }
  auto less = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return s.token(a.second) < s.token(b.second);
  };
  if (cands.size() < k) result.short_result = true;
  const std::size_t take = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(), less);
  for (std::size_t i = 0; i < take; ++i) result.items.push_back({s.token(cands[i].second), cands[i].first});
  return result;
}

}  // namespace

double cosine_distance(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine_distance(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

NeighborList nearest_neighbors(const EmbeddingSpace& s, std::string_view center_token, std::size_t k,
                               KindFilter filter) {
  const std::size_t r = s.row(center_token);
  const auto v = s.row_vector(r);
  std::vector<double> q(v.begin(), v.end());
  return scan(s, q, s.row_norm(r), k, filter, r);
}

NeighborList nearest_to_vector(const EmbeddingSpace& s, std::span<const double> query, std::size_t k,
                               KindFilter filter) {
  if (query.size() != static_cast<std::size_t>(s.dim())) throw std::invalid_argument("query dimension mismatch");
  double n = 0.0;
  for (double x : query) n += x * x;
  return scan(s, query, std::sqrt(n), k, filter, std::nullopt);
}

std::vector<double> centroid(const EmbeddingSpace& s, std::span<const std::string> keywords, std::size_t* missing) {
  std::vector<double> sum(static_cast<std::size_t>(s.dim()), 0.0);
  std::size_t present = 0, absent = 0;
  for (const auto& k : keywords) {
    const auto tok = keyword_token(k);
    if (!s.contains(tok)) {
      ++absent;
      continue;
    }
    const auto v = s.vector(tok);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    ++present;
  }
  if (missing) *missing = absent;
  if (present == 0) throw std::invalid_argument("unrepresentable paper");
  for (auto& x : sum) x /= static_cast<double>(present);
  return sum;
}

}  // namespace frontier
