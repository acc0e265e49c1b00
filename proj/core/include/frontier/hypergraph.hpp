#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frontier/corpus.hpp"
#include "frontier/util.hpp"

namespace frontier {

enum class NodeKind : std::uint8_t { Author, Keyword };

struct HyperNode {
  NodeKind kind = NodeKind::Keyword;
  std::string id;

  auto operator<=>(const HyperNode&) const = default;
};

// Walk-corpus token: "A:<author_id>" or "K:<keyword>".
std::string node_token(const HyperNode& n);
std::string keyword_token(std::string_view keyword);
std::string author_token(std::string_view author_id);
HyperNode parse_token(std::string_view token);

using NodeId = std::uint32_t;

struct Hyperedge {
  std::string paper_id;
  std::vector<NodeId> authors;
  std::vector<NodeId> keywords;

  std::size_t size() const { return authors.size() + keywords.size(); }
  bool operator==(const Hyperedge&) const = default;
};

// Author-keyword hypergraph: one hyperedge per paper with >= 1 keyword.
class Hypergraph {
 public:
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const HyperNode& node(NodeId id) const { return nodes_[id]; }
  std::span<const HyperNode> nodes() const { return nodes_; }
  std::span<const Hyperedge> edges() const { return edges_; }
  std::span<const std::uint32_t> incident_edges(NodeId id) const { return incidence_[id]; }
  std::size_t degree(NodeId id) const { return incidence_[id].size(); }
  // Incident edges with at least two members; only these carry walks.
  std::span<const std::uint32_t> walkable_edges(NodeId id) const { return walkable_[id]; }

  std::optional<NodeId> find(const HyperNode& n) const;
  std::vector<NodeId> keyword_nodes() const;
  std::size_t keyword_count() const;
  std::size_t author_count() const { return node_count() - keyword_count(); }

  bool operator==(const Hypergraph& other) const;

  // Adds a paper as a hyperedge; papers without keywords are skipped.
  void add_paper(const PaperRecord& p);

 private:
  NodeId intern(NodeKind kind, const std::string& id);

  std::vector<HyperNode> nodes_;
  std::map<HyperNode, NodeId> lookup_;
  std::vector<Hyperedge> edges_;
  std::vector<std::vector<std::uint32_t>> incidence_;
  std::vector<std::vector<std::uint32_t>> walkable_;
};

Hypergraph build_hypergraph(const CorpusView& view);

struct WalkConfig {
  int length = 20;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// One step of the generalized walk: an incident hyperedge is drawn uniformly,
// then the next node's kind is drawn (Author with probability
// alpha / (alpha + 1)), falling back to the other kind if the edge has no
// member of the drawn kind; the node is uniform among that kind's members
// other than `current`. If the drawn kind has no such member the walk stays.
// Throws std::runtime_error("no incident edge") for an isolated node.
NodeId walk_step(const Hypergraph& g, NodeId current, double alpha, Rng& rng);

using Walk = std::vector<NodeId>;

// n_walks walks of cfg.length nodes starting from uniformly drawn keyword
// nodes. Walk i uses its own stream derived from (cfg.seed, i), so the output
// does not depend on cfg.threads.
std::vector<Walk> generate_walks(const Hypergraph& g, const WalkConfig& cfg, std::size_t n_walks);

std::vector<std::string> walk_tokens(const Hypergraph& g, const Walk& w);

// One walk per line, tokens separated by tabs. Lines starting with '#' are
// header comments.
void write_walks(const std::filesystem::path& path, const Hypergraph& g, std::span<const Walk> walks,
                 std::string_view header = {});
std::vector<std::vector<std::string>> read_walks(const std::filesystem::path& path);

// Edge-list export: paper_id followed by member tokens, tab separated.
void write_hypergraph(const std::filesystem::path& path, const Hypergraph& g, std::string_view header = {});
Hypergraph read_hypergraph(const std::filesystem::path& path);

}  // namespace frontier
