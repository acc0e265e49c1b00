#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "frontier/corpus.hpp"

namespace frontier {

// Directed citing -> cited edges between papers of one corpus. Self-citations
// and duplicate edges are dropped; references to papers outside the corpus
// are ignored.
class CitationGraph {
 public:
  CitationGraph() = default;
  explicit CitationGraph(const Corpus& corpus);

  // Builds from explicit (citing, cited) pairs; ids must appear in `years`.
  CitationGraph(std::vector<std::pair<std::string, int>> papers,
                std::span<const std::pair<std::string, std::string>> edges);

  std::size_t size() const { return ids_.size(); }
  std::optional<std::uint32_t> find(std::string_view id) const;
  const std::string& id(std::uint32_t n) const { return ids_[n]; }
  int year(std::uint32_t n) const { return years_[n]; }
  std::span<const std::uint32_t> references(std::uint32_t n) const { return refs_[n]; }
  std::span<const std::uint32_t> citers(std::uint32_t n) const { return citers_[n]; }
  std::size_t edge_count() const;

 private:
  void add_edge(std::uint32_t citing, std::uint32_t cited);
  void finish();

  std::vector<std::string> ids_;
  std::vector<int> years_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<std::uint32_t>> refs_;
  std::vector<std::vector<std::uint32_t>> citers_;
};

struct DisruptionScore {
  std::string paper_id;
  std::optional<double> d_value;  // undefined without references or in-window citers
  std::uint32_t n_f = 0;
  std::uint32_t n_b = 0;
  std::uint32_t n_r = 0;
  int window_years = 5;
};

struct DisruptionOptions {
  int window = 5;
  // Subsequent papers are those with focal.year < year <= focal.year + window;
  // when true, same-year papers are admitted as well.
  bool include_same_year = false;
};

// CD index: n_f papers cite the focal paper but none of its references, n_b
// cite both, n_r cite references only; D = (n_f - n_b) / (n_f + n_b + n_r).
DisruptionScore cd_index(const CitationGraph& g, std::string_view focal, const DisruptionOptions& opt = {});

std::vector<std::string> tag_disruptive(std::span<const DisruptionScore> scores, double pct = 0.05);

}  // namespace frontier
