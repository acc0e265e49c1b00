#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "frontier/hypergraph.hpp"

namespace frontier {

class KeyMissing : public std::out_of_range {
 public:
  explicit KeyMissing(const std::string& key) : std::out_of_range("node not in embedding space: " + key) {}
};

enum class ExecutionMode { Deterministic, Parallel };

std::string_view to_string(ExecutionMode m);
ExecutionMode parse_mode(std::string_view s);

// Node vectors for one analysis year. Rows are keyed by walk token
// ("K:<keyword>" / "A:<author>") and kept in lexicographic token order.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  EmbeddingSpace(int year, int dim, std::vector<std::string> tokens, std::vector<float> matrix,
                 std::string trained_on = {});

  int year() const { return year_; }
  int dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& trained_on() const { return trained_on_; }

  std::span<const std::string> tokens() const { return tokens_; }
  const std::string& token(std::size_t row) const { return tokens_[row]; }
  NodeKind kind(std::size_t row) const { return tokens_[row][0] == 'A' ? NodeKind::Author : NodeKind::Keyword; }

  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }
  bool contains_keyword(std::string_view keyword) const { return contains(keyword_token(keyword)); }
  std::size_t row(std::string_view token) const;  // throws KeyMissing
  std::span<const float> vector(std::string_view token) const { return row_vector(row(token)); }
  std::span<const float> row_vector(std::size_t r) const {
    return {matrix_.data() + r * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double row_norm(std::size_t r) const { return norms_[r]; }

  std::vector<std::string> keywords() const;

  bool operator==(const EmbeddingSpace& other) const {
    return year_ == other.year_ && dim_ == other.dim_ && tokens_ == other.tokens_ && matrix_ == other.matrix_;
  }

  // Binary layout (little endian): int32 year, int32 dim, uint64 count;
  // count x (uint32 length, bytes) node table; count*dim float32 row-major
  // matrix; optional trailer (uint32 length, bytes) holding an artifact stamp.
  void save_binary(const std::filesystem::path& path, std::string_view stamp = {}) const;
  static EmbeddingSpace load_binary(const std::filesystem::path& path);
  // "node,v1,v2,..." per line.
  void save_text(const std::filesystem::path& path) const;

 private:
  int year_ = 0;
  int dim_ = 0;
  std::string trained_on_;
  std::vector<std::string> tokens_;
  std::vector<float> matrix_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TrainConfig {
  int dim = 100;
  int context_window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  int min_count = 1;
  std::uint64_t seed = 1;
  ExecutionMode mode = ExecutionMode::Deterministic;
  unsigned threads = 1;
};

struct TrainResult {
  EmbeddingSpace space;
  // Mean negative-sampling loss per (center, context) pair on a fixed sample
  // of pairs, evaluated after each epoch.
  std::vector<double> epoch_loss;
};

// Skip-gram with negative sampling over walk token sequences. Deterministic
// mode runs a single update stream and is bitwise reproducible per seed.
TrainResult train_embedding(const std::vector<std::vector<std::string>>& walks, const TrainConfig& cfg, int year,
                            std::string trained_on = {});

// 1 - u.v / (|u||v|); throws std::invalid_argument on a zero vector or a
// dimension mismatch.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_distance(std::span<const float> u, std::span<const float> v);

enum class KindFilter { Keyword, Author, Any };

struct Neighbor {
  std::string token;
  double distance = 0.0;
};

struct NeighborList {
  std::vector<Neighbor> items;
  bool short_result = false;  // fewer than k candidates were available
};

// Exact scan. Ascending distance, ties by token; the center is excluded.
NeighborList nearest_neighbors(const EmbeddingSpace& s, std::string_view center_token, std::size_t k,
                               KindFilter filter);
// Same ordering around an arbitrary query vector.
NeighborList nearest_to_vector(const EmbeddingSpace& s, std::span<const double> query, std::size_t k,
                               KindFilter filter);

// Mean of the vectors of the keywords present in s; absent keywords are
// counted in *missing. Throws std::invalid_argument("unrepresentable paper")
// when none is present.
std::vector<double> centroid(const EmbeddingSpace& s, std::span<const std::string> keywords,
                             std::size_t* missing = nullptr);

}  // namespace frontier
