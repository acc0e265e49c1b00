#include "frontier/prescience.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_set>

#include "frontier/util.hpp"

namespace frontier {

std::string_view to_string(Variant v) { return v == Variant::Context ? "context" : "content"; }

Variant parse_variant(std::string_view s) {
  if (s == "content") return Variant::Content;
  if (s == "context") return Variant::Context;
  throw std::invalid_argument("unknown variant: " + std::string(s));
}

FactorModel::FactorModel(int year, Variant variant, int dims, std::vector<std::string> nodes, std::vector<double> theta,
                         std::vector<double> salience)
    : year_(year),
      variant_(variant),
      dims_(dims),
      nodes_(std::move(nodes)),
      theta_(std::move(theta)),
      salience_(std::move(salience)) {
  if (dims_ < 1) throw std::invalid_argument("factor model needs dims >= 1");
  if (theta_.size() != nodes_.size() * static_cast<std::size_t>(dims_) || salience_.size() != nodes_.size()) {
    throw std::invalid_argument("factor model parameter sizes do not match node table");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], i).second) throw std::invalid_argument("duplicate node " + nodes_[i]);
  }
}

std::size_t FactorModel::row(std::string_view node) const {
  auto it = index_.find(std::string(node));
  if (it == index_.end()) throw OutOfVocabulary(std::string(node));
  return it->second;
}

std::vector<std::size_t> FactorModel::rows_of(std::span<const std::string> h) const {
  std::vector<std::size_t> rows;
  rows.reserve(h.size());
  for (const auto& n : h) rows.push_back(row(n));
  return rows;
}

double FactorModel::proximity(std::span<const std::string> h) const {
  const auto rows = rows_of(h);
  double sum = 0.0;
  for (int d = 0; d < dims_; ++d) {
    double prod = 1.0;
    for (auto r : rows) prod *= theta_[r * static_cast<std::size_t>(dims_) + static_cast<std::size_t>(d)];
    sum += prod;
  }
  return sum;
}

double FactorModel::propensity(std::span<const std::string> h) const {
  double r = 1.0;
  for (auto row : rows_of(h)) r *= salience_[row];
  return proximity(h) * r;
}

Novelty FactorModel::novelty(std::span<const std::string> h) const {
  const double p = proximity(h);  // validates membership
  Novelty n;
  if (h.size() <= 1) return n;
  if (p < kProximityFloor) {
    n.value = -std::log(kProximityFloor);
    n.capped = true;
  } else {
    n.value = std::max(0.0, -std::log(p));
  }
  return n;
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
  if (!in) throw std::runtime_error("truncated factor model file");
  return v;
}

}  // namespace

void FactorModel::save_binary(const std::filesystem::path& path, std::string_view stamp) const {
  std::string out;
  put<std::int32_t>(out, year_);
  put<std::int32_t>(out, variant_ == Variant::Context ? 1 : 0);
  put<std::int32_t>(out, dims_);
  put<std::uint64_t>(out, nodes_.size());
  for (const auto& n : nodes_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n.size()));
    out += n;
  }
  out.append(reinterpret_cast<const char*>(theta_.data()), theta_.size() * sizeof(double));
  out.append(reinterpret_cast<const char*>(salience_.data()), salience_.size() * sizeof(double));
  if (!stamp.empty()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(stamp.size()));
    out += stamp;
  }
  write_text_file(path, out);
}

FactorModel FactorModel::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read factor model " + path.string());
  const auto year = get<std::int32_t>(in);
  const auto variant = get<std::int32_t>(in) == 1 ? Variant::Context : Variant::Content;
  const auto dims = get<std::int32_t>(in);
  const auto count = get<std::uint64_t>(in);
  std::vector<std::string> nodes(count);
  for (auto& n : nodes) {
    n.resize(get<std::uint32_t>(in));
    in.read(n.data(), static_cast<std::streamsize>(n.size()));
  }
  std::vector<double> theta(count * static_cast<std::size_t>(dims));
  std::vector<double> salience(count);
  in.read(reinterpret_cast<char*>(theta.data()), static_cast<std::streamsize>(theta.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(salience.data()), static_cast<std::streamsize>(salience.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated factor model file " + path.string());
  return FactorModel(year, variant, dims, std::move(nodes), std::move(theta), std::move(salience));
}

namespace {

struct Example {
  std::vector<std::uint32_t> members;
  double y = 0.0;
};

struct ComboHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto x : v) h = splitmix64(h ^ x);
    return static_cast<std::size_t>(h);
  }
};

constexpr double kResidualClip = 10.0;
constexpr double kMaxLogLambda = 50.0;

class PoissonFactorTrainer {
 public:
  PoissonFactorTrainer(std::size_t nodes, const FactorFitConfig& cfg, std::span<const double> degree)
      : n_(nodes), dims_(static_cast<std::size_t>(cfg.dims)), cfg_(cfg) {
    Rng init = derived_rng(cfg.seed, 0xFAC7);
    std::normal_distribution<double> normal(0.0, cfg.init_scale);
    phi_.resize(n_ * dims_);
    for (auto& x : phi_) x = normal(init);
    const double mean = std::accumulate(degree.begin(), degree.end(), 0.0) / static_cast<double>(n_);
    rho_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) rho_[i] = std::log(degree[i] / mean);
  }

  // Returns the sampled log-likelihood accumulated during the pass.
  double pass(std::span<const Example> examples, double lr) {
    const unsigned threads = cfg_.mode == ExecutionMode::Parallel
                                 ? std::max(1u, std::min<unsigned>(cfg_.threads, static_cast<unsigned>(examples.size())))
                                 : 1u;
    if (threads == 1) return run(examples, lr);
    std::vector<double> ll(threads, 0.0);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (examples.size() + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = std::min(examples.size(), t * chunk);
        const std::size_t e = std::min(examples.size(), b + chunk);
        pool.emplace_back([&, t, b, e] { ll[t] = run(examples.subspan(b, e - b), lr); });
      }
    }
    return std::accumulate(ll.begin(), ll.end(), 0.0);
  }

  std::vector<double> theta() const {
    std::vector<double> out(n_ * dims_);
    for (std::size_t i = 0; i < n_; ++i) softmax_row(i, &out[i * dims_]);
    return out;
  }

  std::vector<double> salience() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = std::exp(rho_[i]);
    return out;
  }

 private:
  void softmax_row(std::size_t i, double* out) const {
    const double* p = &phi_[i * dims_];
    const double mx = *std::max_element(p, p + dims_);
    double s = 0.0;
    for (std::size_t d = 0; d < dims_; ++d) {
      out[d] = std::exp(p[d] - mx);
      s += out[d];
    }
    for (std::size_t d = 0; d < dims_; ++d) out[d] /= s;
  }

  double run(std::span<const Example> examples, double lr) {
    std::vector<double> theta;
    std::vector<double> logq(dims_), resp(dims_);
    double ll = 0.0;
    for (const auto& ex : examples) {
      const std::size_t k = ex.members.size();
      theta.resize(k * dims_);
      std::fill(logq.begin(), logq.end(), 0.0);
      double rho_sum = 0.0;
      for (std::size_t m = 0; m < k; ++m) {
        softmax_row(ex.members[m], &theta[m * dims_]);
        for (std::size_t d = 0; d < dims_; ++d) logq[d] += std::log(std::max(theta[m * dims_ + d], 1e-300));
        rho_sum += rho_[ex.members[m]];
      }
      const double mx = *std::max_element(logq.begin(), logq.end());
      double s = 0.0;
      for (std::size_t d = 0; d < dims_; ++d) {
        resp[d] = std::exp(logq[d] - mx);
        s += resp[d];
      }
      for (auto& r : resp) r /= s;
      const double log_p = mx + std::log(s);
      const double log_lambda = std::min(log_p + rho_sum, kMaxLogLambda);
      const double lambda = std::exp(log_lambda);
      ll += ex.y * log_lambda - lambda;
      const double g = std::clamp(ex.y - lambda, -kResidualClip, kResidualClip) * lr;
      for (std::size_t m = 0; m < k; ++m) {
        double* p = &phi_[ex.members[m] * dims_];
        const double* t = &theta[m * dims_];
        for (std::size_t d = 0; d < dims_; ++d) p[d] += g * (resp[d] - t[d]);
        if (!cfg_.freeze_salience) rho_[ex.members[m]] += g;
      }
    }
    return ll;
  }

  std::size_t n_;
  std::size_t dims_;
  const FactorFitConfig& cfg_;
  std::vector<double> phi_;
  std::vector<double> rho_;
};

}  // namespace

FactorModel fit_factor_model(std::span<const std::vector<std::string>> combinations, const FactorFitConfig& cfg,
                             int year, Variant variant, FitDiagnostics* diagnostics) {
  if (cfg.dims < 2) throw std::invalid_argument("factor model needs D >= 2");
  if (cfg.epochs < 1 || cfg.negatives < 0 || cfg.learning_rate <= 0) {
    throw std::invalid_argument("invalid factor fit config");
  }
  FitDiagnostics diag;
  std::set<std::string> universe;
  std::vector<std::vector<std::string>> kept;
  for (const auto& c : combinations) {
    std::set<std::string> distinct(c.begin(), c.end());
    if (distinct.size() < 2) {
      ++diag.skipped;
      continue;
    }
    universe.insert(distinct.begin(), distinct.end());
    kept.emplace_back(distinct.begin(), distinct.end());
  }
  if (kept.empty()) throw std::invalid_argument("no combination with >= 2 nodes to fit");

  std::vector<std::string> nodes(universe.begin(), universe.end());
  std::unordered_map<std::string, std::uint32_t> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) ids.emplace(nodes[i], static_cast<std::uint32_t>(i));

  std::map<std::vector<std::uint32_t>, double> counts;
  std::vector<double> degree(nodes.size(), 0.0);
  for (const auto& c : kept) {
    std::vector<std::uint32_t> e;
    for (const auto& n : c) {
      e.push_back(ids.at(n));
      degree[e.back()] += 1.0;
    }
    std::sort(e.begin(), e.end());
    counts[e] += 1.0;
  }
  std::vector<Example> positives;
  std::unordered_set<std::vector<std::uint32_t>, ComboHash> observed;
  for (auto& [members, y] : counts) {
    observed.insert(members);
    positives.push_back({members, y});
  }
  diag.positives = positives.size();

  PoissonFactorTrainer trainer(nodes.size(), cfg, degree);
  Rng rng = derived_rng(cfg.seed, 0x5A3B1E);
  const std::size_t n = nodes.size();
  std::vector<Example> epoch;
  for (int e = 0; e < cfg.epochs; ++e) {
    epoch.clear();
    for (const auto& pos : positives) {
      epoch.push_back(pos);
      const std::size_t size = pos.members.size();
      if (size > n) continue;
      for (int k = 0; k < cfg.negatives; ++k) {
        Example neg;
        for (int attempt = 0; attempt < 10; ++attempt) {
          std::set<std::uint32_t> pick;
          while (pick.size() < size) pick.insert(static_cast<std::uint32_t>(uniform_index(rng, n)));
          neg.members.assign(pick.begin(), pick.end());
          if (!observed.contains(neg.members)) break;
          neg.members.clear();
        }
        if (!neg.members.empty()) epoch.push_back(std::move(neg));
      }
    }
    std::shuffle(epoch.begin(), epoch.end(), rng);
    const double lr = cfg.learning_rate * std::pow(cfg.decay, e / std::max(1, cfg.decay_every));
    const double ll = trainer.pass(epoch, lr);
    if (!std::isfinite(ll)) {
      throw std::runtime_error("factor model fit diverged at epoch " + std::to_string(e) +
                               " (non-finite log-likelihood); lower learning_rate");
    }
    diag.epoch_loglik.push_back(ll);
  }
  if (diagnostics) *diagnostics = std::move(diag);
  return FactorModel(year, variant, cfg.dims, std::move(nodes), trainer.theta(), trainer.salience());
}

const std::vector<std::string>& combination_of(const PaperRecord& p, Variant v) {
  return v == Variant::Context ? p.ref_venues : p.keywords;
}

std::vector<std::vector<std::string>> combinations(const CorpusView& view, Variant v) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : view) {
    const auto& c = combination_of(p, v);
    if (c.size() >= 2) out.push_back(c);
  }
  return out;
}

SurprisePair surprise_pair(const FactorModel& at_pub, const FactorModel& later, const PaperRecord& p) {
  SurprisePair out;
  const auto& h = combination_of(p, at_pub.variant());
  if (h.size() < 2) {
    out.status = SurpriseStatus::TooSmall;
    return out;
  }
  for (const auto& n : h) {
    if (!at_pub.contains(n)) {
      out.status = SurpriseStatus::MissingAtPublication;
      return out;
    }
  }
  for (const auto& n : h) {
    if (!later.contains(n)) {
      out.status = SurpriseStatus::MissingLater;
      return out;
    }
  }
  out.at_pub = at_pub.novelty(h);
  out.later = later.novelty(h);
  return out;
}

PrescienceScore prescience_score(std::string paper_id, const SurprisePair& pair) {
  PrescienceScore s;
  s.paper_id = std::move(paper_id);
  s.surprise_at_pub = pair.at_pub.value;
  s.surprise_later = pair.later.value;
  s.prescience = s.surprise_at_pub - s.surprise_later;
  s.capped = pair.at_pub.capped || pair.later.capped;
  return s;
}

namespace {

std::vector<double> prescience_values(std::span<const PrescienceScore> scores) {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& s : scores) v.push_back(s.prescience);
  return v;
}

}  // namespace

std::vector<std::string> tag_prescient(std::span<const PrescienceScore> scores, double pct) {
  std::vector<std::string> out;
  for (auto i : select_top(prescience_values(scores), pct)) out.push_back(scores[i].paper_id);
  return out;
}

std::vector<std::string> tag_declining(std::span<const PrescienceScore> scores, double pct) {
  std::vector<std::string> out;
  for (auto i : select_bottom(prescience_values(scores), pct)) out.push_back(scores[i].paper_id);
  return out;
}

}  // namespace frontier
