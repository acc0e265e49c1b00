#include "frontier/disruption.hpp"

#include <algorithm>
#include <stdexcept>

#include "frontier/util.hpp"

namespace frontier {

CitationGraph::CitationGraph(const Corpus& corpus) {
  for (const auto& p : corpus.records()) {
    index_.emplace(p.paper_id, static_cast<std::uint32_t>(ids_.size()));
    ids_.push_back(p.paper_id);
    years_.push_back(p.year);
  }
  refs_.resize(ids_.size());
  citers_.resize(ids_.size());
  for (const auto& p : corpus.records()) {
    const auto citing = index_.at(p.paper_id);
    for (const auto& r : p.references) {
      auto it = index_.find(r);
      if (it != index_.end()) add_edge(citing, it->second);
    }
  }
  finish();
}

CitationGraph::CitationGraph(std::vector<std::pair<std::string, int>> papers,
                             std::span<const std::pair<std::string, std::string>> edges) {
  for (auto& [id, year] : papers) {
    if (!index_.emplace(id, static_cast<std::uint32_t>(ids_.size())).second) {
      throw std::invalid_argument("duplicate paper id " + id);
    }
    ids_.push_back(std::move(id));
    years_.push_back(year);
  }
  refs_.resize(ids_.size());
  citers_.resize(ids_.size());
  for (const auto& [from, to] : edges) {
    auto a = index_.find(from), b = index_.find(to);
    if (a == index_.end() || b == index_.end()) throw std::invalid_argument("edge references unknown paper");
    add_edge(a->second, b->second);
  }
  finish();
}

void CitationGraph::add_edge(std::uint32_t citing, std::uint32_t cited) {
  if (citing == cited) return;
  refs_[citing].push_back(cited);
  citers_[cited].push_back(citing);
}

void CitationGraph::finish() {
  for (auto* lists : {&refs_, &citers_}) {
    for (auto& l : *lists) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
}

std::size_t CitationGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& r : refs_) n += r.size();
  return n;
}

std::optional<std::uint32_t> CitationGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DisruptionScore cd_index(const CitationGraph& g, std::string_view focal, const DisruptionOptions& opt) {
  DisruptionScore score;
  score.paper_id = std::string(focal);
  score.window_years = opt.window;
  const auto f = g.find(focal);
  if (!f) throw std::invalid_argument("unknown focal paper " + std::string(focal));
  const int y0 = g.year(*f);
  auto in_window = [&](std::uint32_t n) {
    if (n == *f) return false;
    const int y = g.year(n);
    const bool after = opt.include_same_year ? y >= y0 : y > y0;
    return after && y <= y0 + opt.window;
  };

  const auto refs = g.references(*f);
  // Candidate subsequent papers: in-window citers of the focal paper or of any
  // of its references.
  std::vector<std::uint32_t> candidates;
  for (auto c : g.citers(*f)) {
    if (in_window(c)) candidates.push_back(c);
  }
  const bool has_citers = !candidates.empty();
  for (auto r : refs) {
    for (auto c : g.citers(r)) {
      if (in_window(c)) candidates.push_back(c);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (auto c : candidates) {
    const auto cr = g.references(c);  // sorted
    const bool cites_focal = std::binary_search(cr.begin(), cr.end(), *f);
    bool cites_ref = false;
    for (auto r : refs) {
      if (std::binary_search(cr.begin(), cr.end(), r)) {
        cites_ref = true;
        break;
      }
    }
    if (cites_focal && !cites_ref) ++score.n_f;
    else if (cites_focal && cites_ref) ++score.n_b;
    else if (cites_ref) ++score.n_r;
  }
  if (refs.empty() || !has_citers) return score;
  const double denom = static_cast<double>(score.n_f + score.n_b + score.n_r);
  score.d_value = (static_cast<double>(score.n_f) - static_cast<double>(score.n_b)) / denom;
  return score;
}

std::vector<std::string> tag_disruptive(std::span<const DisruptionScore> scores, double pct) {
  std::vector<double> values;
  std::vector<std::size_t> defined;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].d_value) {
      values.push_back(*scores[i].d_value);
      defined.push_back(i);
    }
  }
  std::vector<std::string> out;
  for (auto i : select_top(values, pct)) out.push_back(scores[defined[i]].paper_id);
  return out;
}

}  // namespace frontier
