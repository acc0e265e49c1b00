#include "frontier/hypergraph.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace frontier {

std::string node_token(const HyperNode& n) { return (n.kind == NodeKind::Author ? "A:" : "K:") + n.id; }
std::string keyword_token(std::string_view keyword) { return "K:" + std::string(keyword); }
std::string author_token(std::string_view author_id) { return "A:" + std::string(author_id); }

HyperNode parse_token(std::string_view token) {
  if (token.size() < 2 || token[1] != ':' || (token[0] != 'A' && token[0] != 'K')) {
    throw std::invalid_argument("bad walk token: " + std::string(token));
  }
  return {token[0] == 'A' ? NodeKind::Author : NodeKind::Keyword, std::string(token.substr(2))};
}

std::optional<NodeId> Hypergraph::find(const HyperNode& n) const {
  auto it = lookup_.find(n);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> Hypergraph::keyword_nodes() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::Keyword) out.push_back(i);
  }
  return out;
}

std::size_t Hypergraph::keyword_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const HyperNode& n) { return n.kind == NodeKind::Keyword; }));
}

bool Hypergraph::operator==(const Hypergraph& other) const {
  return nodes_ == other.nodes_ && edges_ == other.edges_;
}

NodeId Hypergraph::intern(NodeKind kind, const std::string& id) {
  HyperNode key{kind, id};
  auto it = lookup_.find(key);
  if (it != lookup_.end()) return it->second;
  const auto nid = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(key);
  lookup_.emplace(std::move(key), nid);
  incidence_.emplace_back();
  walkable_.emplace_back();
  return nid;
}

void Hypergraph::add_paper(const PaperRecord& p) {
  if (p.keywords.empty()) return;
  Hyperedge e;
  e.paper_id = p.paper_id;
  for (const auto& a : p.authors) {
    auto id = intern(NodeKind::Author, a.author_id);
    if (std::find(e.authors.begin(), e.authors.end(), id) == e.authors.end()) e.authors.push_back(id);
  }
  for (const auto& k : p.keywords) {
    auto id = intern(NodeKind::Keyword, k);
    if (std::find(e.keywords.begin(), e.keywords.end(), id) == e.keywords.end()) e.keywords.push_back(id);
  }
  const auto eid = static_cast<std::uint32_t>(edges_.size());
  const bool walkable = e.size() >= 2;
  for (auto id : e.authors) {
    incidence_[id].push_back(eid);
    if (walkable) walkable_[id].push_back(eid);
  }
  for (auto id : e.keywords) {
    incidence_[id].push_back(eid);
    if (walkable) walkable_[id].push_back(eid);
  }
  edges_.push_back(std::move(e));
}

Hypergraph build_hypergraph(const CorpusView& view) {
  Hypergraph g;
  for (const auto& p : view) g.add_paper(p);
  return g;
}

namespace {

// Uniform member of `pool` other than `current`; returns current if none.
NodeId pick_other(std::span<const NodeId> pool, NodeId current, Rng& rng) {
  const auto self = static_cast<std::size_t>(std::count(pool.begin(), pool.end(), current));
  const std::size_t n = pool.size() - self;
  if (n == 0) return current;
  std::size_t k = uniform_index(rng, n);
  for (auto id : pool) {
    if (id == current) continue;
    if (k-- == 0) return id;
  }
  return current;
}

}  // namespace

NodeId walk_step(const Hypergraph& g, NodeId current, double alpha, Rng& rng) {
  const auto edges = g.walkable_edges(current);
  if (edges.empty()) throw std::runtime_error("no incident edge");
  const Hyperedge& e = g.edges()[edges[uniform_index(rng, edges.size())]];
  bool author_kind = uniform_real(rng) < alpha / (alpha + 1.0);
  if (author_kind && e.authors.empty()) author_kind = false;
  if (!author_kind && e.keywords.empty()) author_kind = true;
  return pick_other(author_kind ? std::span<const NodeId>(e.authors) : std::span<const NodeId>(e.keywords), current,
                    rng);
}

std::vector<Walk> generate_walks(const Hypergraph& g, const WalkConfig& cfg, std::size_t n_walks) {
  if (cfg.length < 2) throw std::invalid_argument("walk length must be >= 2");
  if (cfg.alpha < 0) throw std::invalid_argument("alpha must be nonnegative");
  std::vector<NodeId> starts;
  for (auto id : g.keyword_nodes()) {
    if (!g.walkable_edges(id).empty()) starts.push_back(id);
  }
  std::vector<Walk> walks(starts.empty() ? 0 : n_walks);
  if (walks.empty()) return walks;

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = derived_rng(cfg.seed, i);
      Walk& w = walks[i];
      w.reserve(static_cast<std::size_t>(cfg.length));
      NodeId cur = starts[uniform_index(rng, starts.size())];
      w.push_back(cur);
      while (w.size() < static_cast<std::size_t>(cfg.length)) {
        if (g.walkable_edges(cur).empty()) break;
        cur = walk_step(g, cur, cfg.alpha, rng);
        w.push_back(cur);
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(walks.size())));
  if (threads == 1) {
    run(0, walks.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (walks.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(walks.size(), b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
  }
  return walks;
}

std::vector<std::string> walk_tokens(const Hypergraph& g, const Walk& w) {
  std::vector<std::string> out;
  out.reserve(w.size());
  for (auto id : w) out.push_back(node_token(g.node(id)));
  return out;
}

void write_walks(const std::filesystem::path& path, const Hypergraph& g, std::span<const Walk> walks,
                 std::string_view header) {
  std::string out;
  if (!header.empty()) {
    out += "# ";
    out += header;
    out += '\n';
  }
  for (const auto& w : walks) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out.push_back('\t');
      out += node_token(g.node(w[i]));
    }
    out.push_back('\n');
  }
  write_text_file(path, out);
}

std::vector<std::vector<std::string>> read_walks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read walks " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(split(line, '\t'));
  }
  return out;
}

void write_hypergraph(const std::filesystem::path& path, const Hypergraph& g, std::string_view header) {
  std::string out;
  if (!header.empty()) {
    out += "# ";
    out += header;
    out += '\n';
  }
  for (const auto& e : g.edges()) {
    out += e.paper_id;
    for (auto id : e.authors) out += '\t' + node_token(g.node(id));
    for (auto id : e.keywords) out += '\t' + node_token(g.node(id));
    out.push_back('\n');
  }
  write_text_file(path, out);
}

Hypergraph read_hypergraph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read hypergraph " + path.string());
  Hypergraph g;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto parts = split(line, '\t');
    PaperRecord p;
    p.paper_id = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) {
      auto n = parse_token(parts[i]);
      if (n.kind == NodeKind::Author) {
        p.authors.push_back({n.id, {}, static_cast<int>(p.authors.size()), false});
      } else {
        p.keywords.push_back(n.id);
      }
    }
    g.add_paper(p);
  }
  return g;
}

}  // namespace frontier
