#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace frontier {

using Rng = std::mt19937_64;

// Stateless 64-bit mixer; used to derive independent per-item streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng derived_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// FNV-1a, 64 bit. Content hashes for staleness checks and artifact stamps.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_hex(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);

// Lowercase, trim, collapse internal whitespace runs to one space.
std::string normalize_keyword(std::string_view raw);
std::string to_upper(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(std::span<const std::string> parts, std::string_view sep);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

// Number of items selected by a top-fraction rule: ceil(pct * n), guarded
// against representation error in pct.
std::size_t top_count(double pct, std::size_t n);

// Indices of the top (largest) `pct` fraction of scores; every score tied
// with the boundary value is included. pct <= 0 selects nothing.
std::vector<std::size_t> select_top(std::span<const double> scores, double pct);
// Same for the smallest scores.
std::vector<std::size_t> select_bottom(std::span<const double> scores, double pct);

// Rank-based AUC (Mann-Whitney) of positive vs negative scores; ties count
// one half.
double rank_auc(std::span<const double> positives, std::span<const double> negatives);

// Minimal CSV helpers (RFC 4180 quoting).
std::string csv_escape(std::string_view field);
std::string csv_row(std::span<const std::string> fields);
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace frontier
