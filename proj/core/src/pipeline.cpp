#include "frontier/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>
#include <thread>

#include "frontier/emergence.hpp"
#include "frontier/hypergraph.hpp"
#include "frontier/ingest.hpp"
#include "frontier/synthgen.hpp"
#include "frontier/util.hpp"
#include "json.hpp"

namespace frontier {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Bumped when an artifact format changes so old manifests go stale.
constexpr std::string_view kFormatVersion = "frontier-artifacts-1";

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw std::invalid_argument("config " + std::string(key) + ": expected an integer, got '" + t + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const auto t = trim(v);
  try {
    std::size_t used = 0;
    double d = std::stod(t, &used);
    if (used == t.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config " + std::string(key) + ": expected a number, got '" + t + "'");
}

bool parse_bool(std::string_view key, std::string_view v) {
  const auto t = normalize_keyword(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::invalid_argument("config " + std::string(key) + ": expected true/false, got '" + t + "'");
}

std::vector<std::string> parse_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto& part : split(v, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

fs::path resolve(const fs::path& base, std::string_view v) {
  fs::path p{trim(v)};
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::pair<int, int> parse_years(std::string_view v) {
  const auto t = trim(v);
  auto dots = t.find("..");
  if (dots == std::string::npos) throw std::invalid_argument("config years: expected A..B, got '" + t + "'");
  return {parse_int("years", t.substr(0, dots)), parse_int("years", t.substr(dots + 2))};
}

// Stage letters: I ingest, S synth, H hypergraph, W walks, E embed,
// M emergence, P prescience, D disruption, R report, X sweep, Z exclude.
struct Key {
  std::string_view name;
  std::string_view stages;
  std::function<void(PipelineConfig&, std::string_view, const fs::path&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class T>
std::string num(T v) {
  if constexpr (std::is_floating_point_v<T>) return format_double(v);
  else return std::to_string(v);
}

#define INT_KEY(field, stages)                                                                           \
  Key {                                                                                                  \
    #field, stages, [](PipelineConfig& c, std::string_view v, const fs::path&) {                         \
      c.field = static_cast<decltype(c.field)>(parse_int(#field, v));                                    \
    },                                                                                                   \
        [](const PipelineConfig& c) { return num(c.field); }                                             \
  }
#define REAL_KEY(field, stages)                                                                          \
  Key {                                                                                                  \
    #field, stages, [](PipelineConfig& c, std::string_view v, const fs::path&) { c.field = parse_double(#field, v); }, \
        [](const PipelineConfig& c) { return num(c.field); }                                             \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      {"corpus", "", [](PipelineConfig& c, std::string_view v, const fs::path& b) { c.corpus = resolve(b, v); },
       [](const PipelineConfig& c) { return c.corpus.string(); }},
      {"schema", "I", [](PipelineConfig& c, std::string_view v, const fs::path&) { c.schema = trim(v); },
       [](const PipelineConfig& c) { return c.schema; }},
      {"workdir", "", [](PipelineConfig& c, std::string_view v, const fs::path& b) { c.workdir = resolve(b, v); },
       [](const PipelineConfig& c) { return c.workdir.string(); }},
      {"taxonomy", "", [](PipelineConfig& c, std::string_view v, const fs::path& b) { c.taxonomy = resolve(b, v); },
       [](const PipelineConfig& c) { return c.taxonomy.string(); }},
      {"country_groups", "",
       [](PipelineConfig& c, std::string_view v, const fs::path& b) { c.country_groups = resolve(b, v); },
       [](const PipelineConfig& c) { return c.country_groups.string(); }},
      {"years", "HWEMPDRXZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) {
         if (trim(v).empty() || trim(v) == "auto") {
           c.year_from.reset();
           c.year_to.reset();
           return;
         }
         auto [a, b] = parse_years(v);
         c.year_from = a;
         c.year_to = b;
       },
       [](const PipelineConfig& c) {
         if (!c.year_from || !c.year_to) return std::string("auto");
         return std::to_string(*c.year_from) + ".." + std::to_string(*c.year_to);
       }},
      INT_KEY(hypergraph_span, "HPZ"),
      INT_KEY(disruption_span, "D"),
      INT_KEY(prescience_lag, "HWEMPDRXZ"),
      INT_KEY(convergence_lookback, "HWEMZ"),
      INT_KEY(growth_years, "HWEMPDRXZ"),
      INT_KEY(embedding_dim, "EZ"),
      INT_KEY(walk_length, "WZ"),
      REAL_KEY(walk_alpha, "WZ"),
      INT_KEY(walks_per_keyword, "WZ"),
      INT_KEY(embed_epochs, "EZ"),
      INT_KEY(context_window, "EZ"),
      INT_KEY(embed_negatives, "EZ"),
      INT_KEY(factor_dims, "PZ"),
      INT_KEY(factor_epochs, "PZ"),
      INT_KEY(factor_negatives, "PZ"),
      REAL_KEY(factor_learning_rate, "PZ"),
      INT_KEY(area_size, "MZ"),
      INT_KEY(min_count, "MZ"),
      INT_KEY(credit_k, "MZ"),
      REAL_KEY(area_top_pct, "MZ"),
      REAL_KEY(top_pct, "MPDRZ"),
      {"sweep_pcts", "X",
       [](PipelineConfig& c, std::string_view v, const fs::path&) {
         c.sweep_pcts.clear();
         for (const auto& p : parse_list(v)) c.sweep_pcts.push_back(parse_double("sweep_pcts", p));
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> parts;
         for (double p : c.sweep_pcts) parts.push_back(format_double(p));
         return join(parts, ",");
       }},
      INT_KEY(curve_bins, "R"),
      {"attribution", "RXZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) { c.attribution = parse_attribution(trim(v)); },
       [](const PipelineConfig& c) { return std::string(to_string(c.attribution)); }},
      {"seed", "SWEPZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) {
         const auto t = trim(v);
         std::uint64_t s = 0;
         auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
         if (ec != std::errc() || p != t.data() + t.size()) throw std::invalid_argument("config seed: expected an unsigned integer");
         c.seed = s;
       },
       [](const PipelineConfig& c) { return std::to_string(c.seed); }},
      {"mode", "EPZ", [](PipelineConfig& c, std::string_view v, const fs::path&) { c.mode = parse_mode(trim(v)); },
       [](const PipelineConfig& c) { return std::string(to_string(c.mode)); }},
      INT_KEY(threads, ""),
      {"allow_reviews", "HMPDRXZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) { c.allow_reviews = parse_bool("allow_reviews", v); },
       [](const PipelineConfig& c) { return std::string(c.allow_reviews ? "true" : "false"); }},
      {"languages", "HMPDRXZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) {
         c.languages.clear();
         for (const auto& l : parse_list(v)) c.languages.insert(normalize_keyword(l));
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> l(c.languages.begin(), c.languages.end());
         return join(l, ",");
       }},
      {"exclude_country", "Z",
       [](PipelineConfig& c, std::string_view v, const fs::path&) { c.exclude_country = to_upper(trim(v)); },
       [](const PipelineConfig& c) { return c.exclude_country; }},
      {"variants", "PRXZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) {
         c.variants.clear();
         for (const auto& p : parse_list(v)) c.variants.push_back(parse_variant(p));
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> l;
         for (auto v : c.variants) l.emplace_back(to_string(v));
         return join(l, ",");
       }},
      {"field_filter", "RXZ",
       [](PipelineConfig& c, std::string_view v, const fs::path&) { c.field_filter = parse_list(v); },
       [](const PipelineConfig& c) { return join(c.field_filter, ","); }},
      {"synth_fixture", "S",
       [](PipelineConfig& c, std::string_view v, const fs::path&) { c.synth_fixture = trim(v); },
       [](const PipelineConfig& c) { return c.synth_fixture; }},
  };
  return table;
}

#undef INT_KEY
#undef REAL_KEY

char stage_letter(Stage s) {
  switch (s) {
    case Stage::Ingest: return 'I';
    case Stage::Synth: return 'S';
    case Stage::Hypergraph: return 'H';
    case Stage::Walks: return 'W';
    case Stage::Embed: return 'E';
    case Stage::Emergence: return 'M';
    case Stage::Prescience: return 'P';
    case Stage::Disruption: return 'D';
    case Stage::Report: return 'R';
    case Stage::Sweep: return 'X';
    case Stage::Exclude: return 'Z';
  }
  return '?';
}

std::vector<Stage> upstream_of(Stage s) {
  switch (s) {
    case Stage::Hypergraph: return {Stage::Ingest};
    case Stage::Walks: return {Stage::Hypergraph};
    case Stage::Embed: return {Stage::Walks};
    case Stage::Emergence: return {Stage::Ingest, Stage::Embed};
    case Stage::Prescience: return {Stage::Ingest};
    case Stage::Disruption: return {Stage::Ingest};
    case Stage::Report:
    case Stage::Sweep: return {Stage::Ingest, Stage::Emergence, Stage::Prescience, Stage::Disruption};
    case Stage::Exclude: return {Stage::Ingest, Stage::Emergence, Stage::Prescience};
    default: return {};
  }
}

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Ingest, "ingest"},         {Stage::Synth, "synth"},           {Stage::Hypergraph, "hypergraph"},
    {Stage::Walks, "walks"},           {Stage::Embed, "embed"},           {Stage::Emergence, "emergence"},
    {Stage::Prescience, "prescience"}, {Stage::Disruption, "disruption"}, {Stage::Report, "report"},
    {Stage::Sweep, "sweep"},           {Stage::Exclude, "exclude"}};

fs::path manifest_path(const fs::path& workdir, Stage s) {
  return workdir / std::string(to_string(s)) / "manifest.json";
}

std::optional<json> read_manifest(const fs::path& workdir, Stage s) {
  const auto p = manifest_path(workdir, s);
  if (!fs::exists(p)) return std::nullopt;
  try {
    return json::parse(read_text_file(p));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

// Tiny CSV writer that stamps the producing config hash on the first line.
class CsvOut {
 public:
  CsvOut(std::string_view stamp, std::initializer_list<std::string_view> header) {
    text_ = "# config_hash=" + std::string(stamp) + "\n";
    std::vector<std::string> h(header.begin(), header.end());
    text_ += csv_row(h);
  }
  void row(const std::vector<std::string>& fields) { text_ += csv_row(fields); }
  void save(const fs::path& p) const { write_text_file(p, text_); }

 private:
  std::string text_;
};

// Rows of a stamped CSV as name -> value maps, header validated.
std::vector<std::map<std::string, std::string>> read_csv_table(const fs::path& path,
                                                               std::initializer_list<std::string_view> required) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto f = parse_csv_line(line);
    if (header.empty()) {
      header = std::move(f);
      for (auto r : required) {
        if (std::find(header.begin(), header.end(), r) == header.end()) {
          throw std::runtime_error(path.string() + ": missing column " + std::string(r));
        }
      }
      continue;
    }
    if (f.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row: " + line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < f.size(); ++i) row.emplace(header[i], std::move(f[i]));
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw std::runtime_error(path.string() + ": missing header");
  return rows;
}

Corpus subset(const Corpus& c, const std::set<std::string>& ids) {
  std::vector<PaperRecord> out;
  for (const auto& p : c.records()) {
    if (ids.contains(p.paper_id)) out.push_back(p);
  }
  return Corpus(std::move(out));
}

Corpus year_slice(const Corpus& c, int from, int to) {
  std::vector<PaperRecord> out;
  for (const auto& p : c.records()) {
    if (p.year >= from && p.year <= to) out.push_back(p);
  }
  return Corpus(std::move(out));
}

std::string year_file(std::string_view dir, int y, std::string_view ext) {
  return std::string(dir) + "/" + std::to_string(y) + std::string(ext);
}

std::string prescience_file(Variant v) { return "prescience/scores_" + std::string(to_string(v)) + ".csv"; }

std::string bool_str(bool b) { return b ? "1" : "0"; }

SynthSpec fixture_spec(std::string_view name, std::uint64_t seed) {
  const auto colon = name.find(':');
  const auto base = name.substr(0, colon);
  if (base == "mini") return fixtures::mini_corpus(seed);
  if (base == "standard") return fixtures::standard(seed);
  if (base == "stationary") return fixtures::stationary(seed);
  if (base == "merging") return fixtures::merging_peaks(seed);
  if (base == "citation") return fixtures::planted_citation(seed);
  if (base == "national") return fixtures::national_vocabulary(seed);
  if (base == "null") return fixtures::null_corpus(seed);
  if (base == "scaled" || base == "openalex") {
    std::size_t n = 50000;
    if (colon != std::string_view::npos) n = static_cast<std::size_t>(parse_int("synth_fixture", name.substr(colon + 1)));
    return fixtures::scaled(n, seed);
  }
  throw std::invalid_argument("unknown synth fixture: " + std::string(name));
}

// Field-year grouped score tables for tagging and sweeps.
template <class Row, class F>
FieldYearScores group_scores(const std::vector<Row>& rows, F score) {
  FieldYearScores out;
  for (const auto& r : rows) {
    auto v = score(r);
    if (v) out[{r.field, r.year}].push_back({r.paper_id, *v});
  }
  return out;
}

FieldYearScores citation_scores(const Corpus& c, int from, int to) {
  FieldYearScores out;
  for (const auto& p : c.records()) {
    if (p.year < from || p.year > to || !p.citation_count) continue;
    for (const auto& f : p.fields) out[{f, p.year}].push_back({p.paper_id, static_cast<double>(*p.citation_count)});
  }
  return out;
}

template <class Row>
std::set<std::string> ids_of(const std::vector<Row>& rows) {
  std::set<std::string> out;
  for (const auto& r : rows) out.insert(r.paper_id);
  return out;
}

}  // namespace

// ---- config ----

std::string_view to_string(Stage s) {
  for (const auto& [k, v] : kStageNames) {
    if (k == s) return v;
  }
  return "unknown";
}

Stage parse_stage(std::string_view s) {
  for (const auto& [k, v] : kStageNames) {
    if (v == s) return k;
  }
  throw std::invalid_argument("unknown stage: " + std::string(s));
}

void PipelineConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
  for (const auto& k : key_table()) {
    if (k.name == key) {
      k.set(*this, value, base);
      return;
    }
  }
  throw std::invalid_argument("unknown config key: " + std::string(key));
}

std::string PipelineConfig::get(std::string_view key) const {
  for (const auto& k : key_table()) {
    if (k.name == key) return k.get(*this);
  }
  throw std::invalid_argument("unknown config key: " + std::string(key));
}

std::vector<std::string> PipelineConfig::keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.emplace_back(k.name);
  return out;
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto& k : key_table()) out += std::string(k.name) + " = " + k.get(*this) + "\n";
  return out;
}

PipelineConfig PipelineConfig::parse(std::string_view text, const fs::path& base) {
  PipelineConfig c;
  std::size_t n = 0;
  for (const auto& raw : split(text, '\n')) {
    ++n;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
    c.set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1), base);
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return parse(read_text_file(path), path.has_parent_path() ? path.parent_path() : fs::path{});
}

void PipelineConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid config: " + what);
  };
  for (int v : {hypergraph_span, disruption_span, prescience_lag, convergence_lookback, growth_years, embedding_dim,
                walk_length, walks_per_keyword, embed_epochs, context_window, embed_negatives, factor_epochs,
                factor_negatives, min_count}) {
    need(v > 0, "spans, dims, epochs and counts must be positive");
  }
  need(growth_years >= 3, "growth_years must be at least 3 for a three-parameter fit");
  need(walk_length >= 2, "walk_length must be at least 2");
  need(factor_dims >= 2, "factor_dims must be at least 2");
  need(area_size >= 2 && credit_k >= 1 && curve_bins >= 1, "area_size, credit_k and curve_bins must be positive");
  for (double p : {area_top_pct, top_pct}) need(p > 0.0 && p <= 1.0, "thresholds must lie in (0, 1]");
  for (double p : sweep_pcts) need(p > 0.0 && p <= 1.0, "sweep thresholds must lie in (0, 1]");
  need(walk_alpha >= 0.0 && factor_learning_rate > 0.0, "walk_alpha must be >= 0 and the learning rate positive");
  need(schema == kSchemaNative || schema == kSchemaOpenAlex, "schema must be 1 or openalex");
  need(!variants.empty(), "at least one prescience variant");
  need(!workdir.empty(), "workdir must be set");
  if (year_from && year_to) need(*year_from <= *year_to, "years A..B must have A <= B");
}

unsigned PipelineConfig::effective_threads() const {
  if (mode == ExecutionMode::Deterministic) return 1;
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---- score tables ----

std::vector<EmergenceRow> read_emergence_rows(const fs::path& path) {
  std::vector<EmergenceRow> out;
  for (auto& r : read_csv_table(path, {"paper_id", "year", "field", "distance", "tagged"})) {
    out.push_back({r["paper_id"], std::stoi(r["year"]), r["field"], std::stod(r["distance"]), r["tagged"] == "1"});
  }
  return out;
}

std::vector<PrescienceRow> read_prescience_rows(const fs::path& path) {
  std::vector<PrescienceRow> out;
  for (auto& r : read_csv_table(path, {"paper_id", "year", "field", "variant", "s_pub", "s_later", "prescience",
                                       "capped_flag", "prescient", "declining"})) {
    PrescienceRow row;
    row.paper_id = r["paper_id"];
    row.year = std::stoi(r["year"]);
    row.field = r["field"];
    row.variant = parse_variant(r["variant"]);
    row.s_pub = std::stod(r["s_pub"]);
    row.s_later = std::stod(r["s_later"]);
    row.prescience = std::stod(r["prescience"]);
    row.capped = r["capped_flag"] == "1";
    row.prescient = r["prescient"] == "1";
    row.declining = r["declining"] == "1";
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<DisruptionRow> read_disruption_rows(const fs::path& path) {
  std::vector<DisruptionRow> out;
  for (auto& r : read_csv_table(path, {"paper_id", "year", "field", "d", "n_f", "n_b", "n_r", "tagged"})) {
    DisruptionRow row;
    row.paper_id = r["paper_id"];
    row.year = std::stoi(r["year"]);
    row.field = r["field"];
    if (!r["d"].empty()) row.d = std::stod(r["d"]);
    row.n_f = static_cast<std::uint32_t>(std::stoul(r["n_f"]));
    row.n_b = static_cast<std::uint32_t>(std::stoul(r["n_b"]));
    row.n_r = static_cast<std::uint32_t>(std::stoul(r["n_r"]));
    row.tagged = r["tagged"] == "1";
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<AreaRow> read_area_rows(const fs::path& path) {
  std::vector<AreaRow> out;
  for (auto& r : read_csv_table(path, {"year", "field", "central_keyword", "members", "convergence", "growth_b",
                                       "prevalence", "r2", "final_rank_score", "selected"})) {
    AreaRow a;
    a.year = std::stoi(r["year"]);
    a.field = r["field"];
    a.central = r["central_keyword"];
    a.members = split(r["members"], ';');
    a.convergence = std::stod(r["convergence"]);
    a.growth_b = std::stod(r["growth_b"]);
    a.prevalence = std::stod(r["prevalence"]);
    a.r2 = std::stod(r["r2"]);
    a.final_rank_score = std::stod(r["final_rank_score"]);
    a.selected = r["selected"] == "1";
    out.push_back(std::move(a));
  }
  return out;
}

// ---- pipeline ----

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Corpus Pipeline::records() const {
  if (!records_) {
    const auto p = artifact("ingest/records.jsonl");
    if (!fs::exists(p)) throw MissingArtifact("ingest");
    auto r = ingest(p);
    if (!r.rejections.empty()) throw std::runtime_error("ingested records failed to reload: " + r.rejections.front().reason);
    records_ = std::move(r.corpus);
  }
  return *records_;
}

Corpus Pipeline::analysis_corpus() const { return filter_articles(records(), cfg_.allow_reviews, cfg_.languages); }

Corpus Pipeline::training_corpus() const {
  auto c = analysis_corpus();
  if (!training_exclusion_.empty()) c = exclude_country(c, training_exclusion_);
  return c;
}

std::pair<int, int> Pipeline::analysis_years() const {
  if (cfg_.year_from && cfg_.year_to) return {*cfg_.year_from, *cfg_.year_to};
  const auto range = analysis_corpus().year_range();
  if (!range) throw std::runtime_error("analysis corpus is empty");
  const int a = cfg_.year_from.value_or(range->first + cfg_.growth_years - 1);
  const int b = cfg_.year_to.value_or(range->second - cfg_.prescience_lag);
  if (a > b) {
    throw std::runtime_error("corpus years " + std::to_string(range->first) + ".." + std::to_string(range->second) +
                             " leave no analysis year; set years = A..B");
  }
  return {a, b};
}

std::vector<int> Pipeline::embedding_years() const {
  const auto [a, b] = analysis_years();
  std::vector<int> out;
  for (int y = a - cfg_.convergence_lookback; y <= b; ++y) out.push_back(y);
  return out;
}

std::string Pipeline::stage_key(Stage s) const {
  Fnv1a h;
  h.update(kFormatVersion);
  h.update("|stage=");
  h.update(to_string(s));
  const char letter = stage_letter(s);
  for (const auto& k : key_table()) {
    if (k.stages.find(letter) == std::string_view::npos) continue;
    h.update("|");
    h.update(k.name);
    h.update("=");
    h.update(k.get(cfg_));
  }
  if (std::string_view("HWEMPZ").find(letter) != std::string_view::npos) {
    h.update("|exclude_training=" + training_exclusion_);
  }
  if (s == Stage::Ingest) {
    if (cfg_.corpus.empty()) throw std::invalid_argument("invalid config: corpus path is not set");
    h.update("|corpus#" + hash_file(cfg_.corpus));
    if (!cfg_.taxonomy.empty()) h.update("|taxonomy#" + hash_file(cfg_.taxonomy));
  }
  if ((s == Stage::Report || s == Stage::Sweep || s == Stage::Exclude) && !cfg_.country_groups.empty()) {
    h.update("|groups#" + hash_file(cfg_.country_groups));
  }
  if (s == Stage::Exclude) h.update("|full_config=" + cfg_.to_text());
  for (Stage u : upstream_of(s)) {
    auto m = read_manifest(cfg_.workdir, u);
    if (!m) throw MissingArtifact(std::string(to_string(u)));
    h.update("|" + std::string(to_string(u)) + "=" + m->value("key", std::string()));
    for (const auto& [file, digest] : m->at("outputs").items()) h.update("|" + file + "#" + digest.get<std::string>());
  }
  return h.hex();
}

bool Pipeline::up_to_date(Stage s, const std::string& key) const {
  auto m = read_manifest(cfg_.workdir, s);
  if (!m || m->value("key", std::string()) != key) return false;
  for (const auto& [file, digest] : m->at("outputs").items()) {
    const auto p = artifact(file);
    if (!fs::exists(p) || hash_file(p) != digest.get<std::string>()) return false;
  }
  return true;
}

void Pipeline::write_manifest(Stage s, const std::string& key, const std::vector<std::string>& outputs) const {
  json m;
  m["stage"] = std::string(to_string(s));
  m["key"] = key;
  json outs = json::object();
  for (const auto& o : outputs) outs[o] = hash_file(artifact(o));
  m["outputs"] = std::move(outs);
  write_text_file(manifest_path(cfg_.workdir, s), m.dump(2) + "\n");
}

void Pipeline::require_stage(Stage s) const {
  auto m = read_manifest(cfg_.workdir, s);
  // The stage must exist and have been produced under the current config.
  if (!m || m->value("key", std::string()) != stage_key(s)) throw MissingArtifact(std::string(to_string(s)));
}

StageOutcome Pipeline::run(Stage s) {
  for (Stage u : upstream_of(s)) require_stage(u);
  const std::string key = stage_key(s);
  StageOutcome out{s, false, key};
  if (up_to_date(s, key)) {
    out.skipped = true;
    return out;
  }
  // Old outputs are removed so a stage never leaves mixed-config artifacts.
  if (s != Stage::Ingest && s != Stage::Synth) {
    std::error_code ec;
    fs::remove_all(cfg_.workdir / std::string(to_string(s)), ec);
  }
  std::vector<std::string> outputs;
  switch (s) {
    case Stage::Ingest: outputs = do_ingest(key); break;
    case Stage::Synth: outputs = do_synth(key); break;
    case Stage::Hypergraph: outputs = do_hypergraph(key); break;
    case Stage::Walks: outputs = do_walks(key); break;
    case Stage::Embed: outputs = do_embed(key); break;
    case Stage::Emergence: outputs = do_emergence(key); break;
    case Stage::Prescience: outputs = do_prescience(key); break;
    case Stage::Disruption: outputs = do_disruption(key); break;
    case Stage::Report: outputs = do_report(key); break;
    case Stage::Sweep: outputs = do_sweep(key); break;
    case Stage::Exclude: outputs = do_exclude(key); break;
  }
  write_manifest(s, key, outputs);
  return out;
}

std::vector<StageOutcome> Pipeline::run_all() {
  std::vector<StageOutcome> out;
  for (Stage s : {Stage::Ingest, Stage::Hypergraph, Stage::Walks, Stage::Embed, Stage::Emergence, Stage::Prescience,
                  Stage::Disruption, Stage::Report, Stage::Sweep}) {
    out.push_back(run(s));
  }
  return out;
}

// ---- stages ----

std::vector<std::string> Pipeline::do_ingest(const std::string& stamp) {
  IngestOptions opt;
  opt.schema_version = cfg_.schema;
  std::optional<FieldTaxonomy> tax;
  if (!cfg_.taxonomy.empty()) {
    tax = FieldTaxonomy::load(cfg_.taxonomy);
    opt.taxonomy = &*tax;
  }
  if (cfg_.schema == kSchemaOpenAlex) opt.openalex_min_concept_level = 1;
  auto result = ingest(cfg_.corpus, opt);
  write_text_file(artifact("ingest/records.jsonl"), "# config_hash=" + stamp + "\n" + export_jsonl_text(result.corpus));
  CsvOut rej(stamp, {"line", "reason"});
  for (const auto& r : result.rejections) rej.row({std::to_string(r.line), r.reason});
  rej.save(artifact("ingest/rejections.csv"));
  records_ = std::move(result.corpus);
  return {"ingest/records.jsonl", "ingest/rejections.csv"};
}

std::vector<std::string> Pipeline::do_synth(const std::string& stamp) {
  const auto r = generate(fixture_spec(cfg_.synth_fixture, cfg_.seed));
  std::vector<std::string> outputs;
  if (cfg_.synth_fixture.starts_with("openalex")) {
    export_openalex_jsonl(r, artifact("synth/openalex.jsonl"));
    outputs.push_back("synth/openalex.jsonl");
  } else {
    write_text_file(artifact("synth/corpus.jsonl"), "# config_hash=" + stamp + "\n" + export_jsonl_text(r.corpus));
    outputs.push_back("synth/corpus.jsonl");
  }
  r.truth.save_csv(artifact("synth/truth.csv"));
  outputs.push_back("synth/truth.csv");
  return outputs;
}

std::vector<std::string> Pipeline::do_hypergraph(const std::string& stamp) {
  const auto train = training_corpus();
  std::vector<std::string> outputs;
  CsvOut index(stamp, {"year", "papers", "edges", "keywords", "authors"});
  for (int y : embedding_years()) {
    const auto view = train.window(y, cfg_.hypergraph_span);
    const auto g = build_hypergraph(view);
    index.row({std::to_string(y), std::to_string(view.size()), std::to_string(g.edge_count()),
               std::to_string(g.keyword_count()), std::to_string(g.author_count())});
    if (g.edge_count() == 0) continue;
    const auto rel = year_file("hypergraph", y, ".tsv");
    write_hypergraph(artifact(rel), g, "config_hash=" + stamp);
    outputs.push_back(rel);
  }
  index.save(artifact("hypergraph/index.csv"));
  outputs.push_back("hypergraph/index.csv");
  return outputs;
}

std::vector<std::string> Pipeline::do_walks(const std::string& stamp) {
  std::vector<std::string> outputs;
  for (int y : embedding_years()) {
    const auto src = artifact(year_file("hypergraph", y, ".tsv"));
    if (!fs::exists(src)) continue;
    const auto g = read_hypergraph(src);
    WalkConfig wc;
    wc.length = cfg_.walk_length;
    wc.alpha = cfg_.walk_alpha;
    wc.seed = splitmix64(cfg_.seed ^ splitmix64(static_cast<std::uint64_t>(y)));
    wc.threads = cfg_.mode == ExecutionMode::Parallel ? cfg_.effective_threads() : 1;
    const auto walks = generate_walks(g, wc, g.keyword_count() * static_cast<std::size_t>(cfg_.walks_per_keyword));
    const auto rel = year_file("walks", y, ".tsv");
    write_walks(artifact(rel), g, walks, "config_hash=" + stamp);
    outputs.push_back(rel);
  }
  return outputs;
}

std::vector<std::string> Pipeline::do_embed(const std::string& stamp) {
  std::vector<std::string> outputs;
  CsvOut losses(stamp, {"year", "epoch", "loss"});
  for (int y : embedding_years()) {
    const auto src = artifact(year_file("walks", y, ".tsv"));
    if (!fs::exists(src)) continue;
    const auto walks = read_walks(src);
    if (walks.empty()) continue;
    TrainConfig tc;
    tc.dim = cfg_.embedding_dim;
    tc.context_window = cfg_.context_window;
    tc.negatives = cfg_.embed_negatives;
    tc.epochs = cfg_.embed_epochs;
    tc.seed = splitmix64(cfg_.seed ^ splitmix64(static_cast<std::uint64_t>(y) + 0x100));
    tc.mode = cfg_.mode;
    tc.threads = cfg_.effective_threads();
    auto res = train_embedding(walks, tc, y, "window " + std::to_string(y));
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
      losses.row({std::to_string(y), std::to_string(e + 1), format_double(res.epoch_loss[e])});
    }
    const auto rel = year_file("embed", y, ".bin");
    res.space.save_binary(artifact(rel), stamp);
    outputs.push_back(rel);
  }
  losses.save(artifact("embed/loss.csv"));
  outputs.push_back("embed/loss.csv");
  return outputs;
}

std::vector<std::string> Pipeline::do_emergence(const std::string& stamp) {
  const auto [a, b] = analysis_years();
  const auto train = training_corpus();
  const auto all = analysis_corpus();
  const KeywordCounts counts(train.all());
  std::map<int, EmbeddingSpace> spaces;
  for (int y : embedding_years()) {
    const auto p = artifact(year_file("embed", y, ".bin"));
    if (fs::exists(p)) spaces.emplace(y, EmbeddingSpace::load_binary(p));
  }
  EmergenceConfig ec;
  ec.area_size = cfg_.area_size;
  ec.lookback = cfg_.convergence_lookback;
  ec.growth_years = cfg_.growth_years;
  ec.min_count = cfg_.min_count;
  ec.area_top_pct = cfg_.area_top_pct;
  ec.paper_top_pct = cfg_.top_pct;
  ec.credit_k = cfg_.credit_k;

  CsvOut candidates(stamp, {"year", "field", "central_keyword", "members", "convergence", "growth_b", "prevalence", "r2",
                            "final_rank_score", "selected"});
  CsvOut selected(stamp, {"year", "field", "central_keyword", "members", "convergence", "growth_b", "prevalence", "r2",
                          "final_rank_score", "selected"});
  CsvOut papers(stamp, {"paper_id", "year", "field", "distance", "tagged"});
  CsvOut credit(stamp, {"year", "field", "central_keyword", "country", "count", "short"});
  CsvOut stats(stamp, {"year", "field", "candidates", "not_embedded", "excluded_convergence", "excluded_fit",
                       "selected", "papers_scored", "papers_unrepresentable", "training_papers"});
  const auto fields = all.field_labels();
  for (int t = a; t <= b; ++t) {
    auto now = spaces.find(t);
    std::vector<const EmbeddingSpace*> seq;
    for (int y = t - cfg_.convergence_lookback; y <= t; ++y) {
      auto it = spaces.find(y);
      if (it != spaces.end()) seq.push_back(&it->second);
    }
    std::optional<AreaCache> cache;
    if (now != spaces.end()) cache.emplace(seq, cfg_.area_size);
    const auto year_view = all.all().filter_year(t);
    const auto train_year = train.all().filter_year(t);
    for (const auto& field : fields) {
      CandidateStats cs;
      std::vector<ScoredArea> ranked;
      if (cache) ranked = score_field_year(counts, *cache, field, t, ec, &cs);
      const auto set = select_emerging(t, field, ranked, cfg_.area_top_pct);
      auto emit = [&](CsvOut& out, const ScoredArea& sa, bool sel) {
        out.row({std::to_string(t), field, sa.area.central, join(sa.area.members, ";"),
                 format_double(sa.scores.convergence), format_double(sa.scores.growth_b),
                 format_double(sa.scores.prevalence), format_double(sa.scores.fit_r2),
                 format_double(sa.scores.final_rank_score), bool_str(sel)});
      };
      for (std::size_t i = 0; i < ranked.size(); ++i) emit(candidates, ranked[i], i < set.areas.size());
      std::vector<Area> areas;
      for (const auto& sa : set.areas) {
        emit(selected, sa, true);
        areas.push_back(sa.area);
        const auto cr = emergence_credit(sa.area, now->second, train.window(t, cfg_.hypergraph_span), cfg_.credit_k);
        for (const auto& [country, n] : cr.countries) {
          credit.row({std::to_string(t), field, sa.area.central, country, std::to_string(n), bool_str(cr.short_result)});
        }
      }
      std::vector<PaperDistance> dist;
      std::size_t unrepresentable = 0;
      if (!areas.empty()) {
        for (const auto& p : year_view.filter_field(field)) {
          auto d = paper_distance(p, now->second, areas);
          if (d) dist.push_back({p.paper_id, *d});
          else ++unrepresentable;
        }
      }
      const auto tags = tag_emergent_papers(dist, cfg_.top_pct);
      const std::set<std::string> tagged(tags.begin(), tags.end());
      for (const auto& d : dist) {
        papers.row({d.paper_id, std::to_string(t), field, format_double(d.distance), bool_str(tagged.contains(d.paper_id))});
      }
      stats.row({std::to_string(t), field, std::to_string(cs.candidates), std::to_string(cs.not_embedded),
                 std::to_string(cs.excluded_convergence), std::to_string(cs.excluded_fit),
                 std::to_string(set.areas.size()), std::to_string(dist.size()), std::to_string(unrepresentable),
                 std::to_string(train_year.filter_field(field).size())});
    }
  }
  candidates.save(artifact("emergence/candidates.csv"));
  selected.save(artifact("emergence/areas.csv"));
  papers.save(artifact("emergence/papers.csv"));
  credit.save(artifact("emergence/credit.csv"));
  stats.save(artifact("emergence/stats.csv"));
  return {"emergence/candidates.csv", "emergence/areas.csv", "emergence/papers.csv", "emergence/credit.csv",
          "emergence/stats.csv"};
}

std::vector<std::string> Pipeline::do_prescience(const std::string& stamp) {
  const auto [a, b] = analysis_years();
  const auto train = training_corpus();
  const auto all = analysis_corpus();
  std::vector<std::string> outputs;
  for (Variant v : cfg_.variants) {
    const std::string vname(to_string(v));
    std::map<int, FactorModel> models;
    CsvOut fit(stamp, {"year", "variant", "epoch", "loglik", "positives"});
    for (int y = a; y <= b + cfg_.prescience_lag; ++y) {
      const auto combos = combinations(train.window(y, cfg_.hypergraph_span), v);
      if (combos.empty()) continue;
      FactorFitConfig fc;
      fc.dims = cfg_.factor_dims;
      fc.epochs = cfg_.factor_epochs;
      fc.negatives = cfg_.factor_negatives;
      fc.learning_rate = cfg_.factor_learning_rate;
      fc.seed = splitmix64(cfg_.seed ^ splitmix64(static_cast<std::uint64_t>(y) + (v == Variant::Context ? 0x300 : 0x200)));
      fc.mode = cfg_.mode;
      fc.threads = cfg_.effective_threads();
      FitDiagnostics diag;
      auto m = fit_factor_model(combos, fc, y, v, &diag);
      for (std::size_t e = 0; e < diag.epoch_loglik.size(); ++e) {
        fit.row({std::to_string(y), vname, std::to_string(e + 1), format_double(diag.epoch_loglik[e]),
                 std::to_string(diag.positives)});
      }
      const auto rel = "prescience/models/" + vname + "_" + std::to_string(y) + ".bin";
      m.save_binary(artifact(rel), stamp);
      outputs.push_back(rel);
      models.emplace(y, std::move(m));
    }
    const auto fit_rel = "prescience/fit_" + vname + ".csv";
    fit.save(artifact(fit_rel));
    outputs.push_back(fit_rel);

    struct Scored {
      const PaperRecord* p;
      PrescienceScore s;
    };
    CsvOut scores(stamp, {"paper_id", "year", "field", "variant", "s_pub", "s_later", "prescience", "capped_flag",
                          "prescient", "declining"});
    CsvOut stats(stamp, {"year", "variant", "scored", "too_small", "missing_at_publication", "missing_later", "no_model"});
    for (int t = a; t <= b; ++t) {
      auto m0 = models.find(t), m1 = models.find(t + cfg_.prescience_lag);
      std::size_t counts[4] = {0, 0, 0, 0}, no_model = 0;
      std::map<std::string, std::vector<Scored>> by_field;
      for (const auto& p : all.all().filter_year(t)) {
        if (m0 == models.end() || m1 == models.end()) {
          ++no_model;
          continue;
        }
        const auto pair = surprise_pair(m0->second, m1->second, p);
        ++counts[static_cast<int>(pair.status)];
        if (pair.status != SurpriseStatus::Ok) continue;
        auto s = prescience_score(p.paper_id, pair);
        for (const auto& f : p.fields) by_field[f].push_back({&p, s});
      }
      stats.row({std::to_string(t), vname, std::to_string(counts[0]), std::to_string(counts[1]),
                 std::to_string(counts[2]), std::to_string(counts[3]), std::to_string(no_model)});
      for (const auto& [field, rows] : by_field) {
        std::vector<PrescienceScore> ss;
        for (const auto& r : rows) ss.push_back(r.s);
        const auto top = tag_prescient(ss, cfg_.top_pct), bottom = tag_declining(ss, cfg_.top_pct);
        const std::set<std::string> ts(top.begin(), top.end()), bs(bottom.begin(), bottom.end());
        for (const auto& r : rows) {
          scores.row({r.s.paper_id, std::to_string(t), field, vname, format_double(r.s.surprise_at_pub),
                      format_double(r.s.surprise_later), format_double(r.s.prescience), bool_str(r.s.capped),
                      bool_str(ts.contains(r.s.paper_id)), bool_str(bs.contains(r.s.paper_id))});
        }
      }
    }
    scores.save(artifact(prescience_file(v)));
    outputs.push_back(prescience_file(v));
    const auto stats_rel = "prescience/stats_" + vname + ".csv";
    stats.save(artifact(stats_rel));
    outputs.push_back(stats_rel);
  }
  return outputs;
}

std::vector<std::string> Pipeline::do_disruption(const std::string& stamp) {
  const auto [a, b] = analysis_years();
  const CitationGraph g(records());
  const auto all = analysis_corpus();
  DisruptionOptions opt;
  opt.window = cfg_.disruption_span;
  std::map<std::pair<std::string, int>, std::vector<DisruptionScore>> cells;
  for (const auto& p : all.records()) {
    if (p.year < a || p.year > b) continue;
    auto s = cd_index(g, p.paper_id, opt);
    for (const auto& f : p.fields) cells[{f, p.year}].push_back(s);
  }
  CsvOut out(stamp, {"paper_id", "year", "field", "d", "n_f", "n_b", "n_r", "tagged"});
  for (const auto& [key, scores] : cells) {
    const auto tags = tag_disruptive(scores, cfg_.top_pct);
    const std::set<std::string> ts(tags.begin(), tags.end());
    for (const auto& s : scores) {
      out.row({s.paper_id, std::to_string(key.second), key.first, s.d_value ? format_double(*s.d_value) : std::string(),
               std::to_string(s.n_f), std::to_string(s.n_b), std::to_string(s.n_r), bool_str(ts.contains(s.paper_id))});
    }
  }
  out.save(artifact("disruption/scores.csv"));
  return {"disruption/scores.csv"};
}

namespace {

struct MeasureTable {
  Measure measure;
  Corpus population;
  std::set<std::string> tags;
};

}  // namespace

std::vector<std::string> Pipeline::do_report(const std::string& stamp) {
  const auto [a, b] = analysis_years();
  const auto all = analysis_corpus();
  const auto span = year_slice(all, a, b);
  std::optional<CountryGroups> groups;
  if (!cfg_.country_groups.empty()) groups = CountryGroups::load(cfg_.country_groups);

  std::vector<MeasureTable> tables;
  {
    const auto rows = read_emergence_rows(artifact("emergence/papers.csv"));
    MeasureTable t{Measure::Emergence, subset(all, ids_of(rows)), {}};
    for (const auto& r : rows) {
      if (r.tagged) t.tags.insert(r.paper_id);
    }
    tables.push_back(std::move(t));
  }
  std::map<Variant, std::vector<PrescienceRow>> prescience;
  for (Variant v : cfg_.variants) {
    auto rows = read_prescience_rows(artifact(prescience_file(v)));
    MeasureTable t{v == Variant::Content ? Measure::ContentPrescience : Measure::ContextPrescience,
                   subset(all, ids_of(rows)), {}};
    for (const auto& r : rows) {
      if (r.prescient) t.tags.insert(r.paper_id);
    }
    tables.push_back(std::move(t));
    prescience.emplace(v, std::move(rows));
  }
  {
    const auto rows = read_disruption_rows(artifact("disruption/scores.csv"));
    std::set<std::string> defined;
    MeasureTable t{Measure::Disruption, {}, {}};
    for (const auto& r : rows) {
      if (r.d) defined.insert(r.paper_id);
      if (r.tagged) t.tags.insert(r.paper_id);
    }
    t.population = subset(all, defined);
    tables.push_back(std::move(t));
  }
  {
    const auto cites = citation_scores(all, a, b);
    std::set<std::string> with;
    for (const auto& [_, v] : cites) {
      for (const auto& s : v) with.insert(s.paper_id);
    }
    tables.push_back({Measure::TopCited, subset(all, with), tag_field_years(cites, cfg_.top_pct)});
  }

  std::vector<std::string> outputs;
  CsvOut unknown(stamp, {"attribution", "measure", "year", "tagged", "attributed", "unknown_fraction"});
  for (auto strategy : kAllStrategies) {
    ReportConfig rc;
    rc.attribution = strategy;
    rc.top_pct = cfg_.top_pct;
    rc.field_filter = cfg_.field_filter;
    rc.groups = groups ? &*groups : nullptr;
    std::vector<CountrySeries> series;
    for (const auto& t : tables) {
      auto s = build_series(t.measure, t.tags, t.population.all(), rc);
      series.insert(series.end(), s.begin(), s.end());
      for (int y = a; y <= b; ++y) {
        const auto slice = country_shares(t.tags, t.population.all().filter_year(y), rc);
        if (slice.tagged == 0) continue;
        unknown.row({std::string(to_string(strategy)), std::string(to_string(t.measure)), std::to_string(y),
                     std::to_string(slice.tagged), std::to_string(slice.attributed), format_double(slice.unknown_fraction)});
      }
    }
    auto cs = citation_series(span.all(), rc);
    series.insert(series.end(), cs.begin(), cs.end());
    auto ps = publication_series(span.all(), rc);
    series.insert(series.end(), ps.begin(), ps.end());
    const auto rel = "report/attribution/series_" + std::string(to_string(strategy)) + ".csv";
    export_series_csv(series, artifact(rel), stamp);
    outputs.push_back(rel);
    if (strategy == cfg_.attribution) {
      export_series_csv(series, artifact("report/series.csv"), stamp);
      outputs.push_back("report/series.csv");
      export_series_plotdata(series, artifact("report/plotdata"), stamp);
      for (const auto& e : fs::directory_iterator(artifact("report/plotdata"))) {
        outputs.push_back("report/plotdata/" + e.path().filename().string());
      }
    }
  }
  unknown.save(artifact("report/unknown.csv"));
  outputs.push_back("report/unknown.csv");

  for (const auto& [v, rows] : prescience) {
    std::vector<PaperScorePair> pairs;
    std::set<std::string> seen;
    for (const auto& r : rows) {
      if (seen.insert(r.paper_id).second) pairs.push_back({r.paper_id, r.s_pub, r.prescience});
    }
    const auto curve = prescience_citation_curve(pairs, all, cfg_.curve_bins, std::string(to_string(v)));
    const auto rel = "report/curve_" + std::string(to_string(v)) + ".csv";
    export_curve_csv(curve, artifact(rel), stamp);
    outputs.push_back(rel);
  }

  // Scientist-credit accounting of emerging areas, kept beside the paper-tag
  // shares: each year's credited-country multiset normalized by its size.
  {
    std::map<int, std::map<std::string, long>> credit;
    for (auto& r : read_csv_table(artifact("emergence/credit.csv"), {"year", "country", "count"})) {
      credit[std::stoi(r["year"])][r["country"]] += std::stol(r["count"]);
    }
    CsvOut out(stamp, {"year", "country", "credit", "share"});
    for (const auto& [y, m] : credit) {
      long total = 0;
      for (const auto& [_, n] : m) total += n;
      for (const auto& [c, n] : m) {
        out.row({std::to_string(y), c, std::to_string(n), format_double(static_cast<double>(n) / static_cast<double>(total))});
      }
    }
    out.save(artifact("report/credit_shares.csv"));
    outputs.push_back("report/credit_shares.csv");
  }
  std::sort(outputs.begin(), outputs.end());
  return outputs;
}

std::vector<std::string> Pipeline::do_sweep(const std::string& stamp) {
  const auto [a, b] = analysis_years();
  const auto all = analysis_corpus();
  std::optional<CountryGroups> groups;
  if (!cfg_.country_groups.empty()) groups = CountryGroups::load(cfg_.country_groups);
  ReportConfig rc;
  rc.attribution = cfg_.attribution;
  rc.field_filter = cfg_.field_filter;
  rc.groups = groups ? &*groups : nullptr;

  struct Input {
    Measure measure;
    FieldYearScores scores;
    bool higher_is_better;
  };
  std::vector<Input> inputs;
  inputs.push_back({Measure::Emergence,
                    group_scores(read_emergence_rows(artifact("emergence/papers.csv")),
                                 [](const EmergenceRow& r) { return std::optional<double>(r.distance); }),
                    false});
  for (Variant v : cfg_.variants) {
    inputs.push_back({v == Variant::Content ? Measure::ContentPrescience : Measure::ContextPrescience,
                      group_scores(read_prescience_rows(artifact(prescience_file(v))),
                                   [](const PrescienceRow& r) { return std::optional<double>(r.prescience); }),
                      true});
  }
  inputs.push_back({Measure::Disruption,
                    group_scores(read_disruption_rows(artifact("disruption/scores.csv")),
                                 [](const DisruptionRow& r) { return r.d; }),
                    true});
  inputs.push_back({Measure::TopCited, citation_scores(all, a, b), true});

  std::vector<std::vector<CountrySeries>> per_pct(cfg_.sweep_pcts.size());
  CsvOut nested(stamp, {"measure", "pct", "tagged", "scored", "nested"});
  std::vector<double> pcts = cfg_.sweep_pcts;
  std::sort(pcts.begin(), pcts.end());
  for (const auto& in : inputs) {
    std::set<std::string> ids;
    std::size_t scored = 0;
    for (const auto& [_, v] : in.scores) {
      scored += v.size();
      for (const auto& s : v) ids.insert(s.paper_id);
    }
    const auto population = subset(all, ids);
    const auto res = threshold_sweep(in.measure, in.scores, population.all(), rc, pcts, in.higher_is_better);
    for (std::size_t i = 0; i < pcts.size(); ++i) {
      per_pct[i].insert(per_pct[i].end(), res.series[i].begin(), res.series[i].end());
      nested.row({std::string(to_string(in.measure)), format_double(pcts[i]), std::to_string(res.tags[i].size()),
                  std::to_string(scored), bool_str(res.nested)});
    }
  }
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < pcts.size(); ++i) {
    const auto rel = "sweep/series_" + format_double(pcts[i]) + ".csv";
    export_series_csv(per_pct[i], artifact(rel), stamp);
    outputs.push_back(rel);
  }
  nested.save(artifact("sweep/nested.csv"));
  outputs.push_back("sweep/nested.csv");
  return outputs;
}

ExclusionResult Pipeline::exclusion_rerun(const std::string& country) {
  if (country.empty()) throw std::invalid_argument("exclusion needs a country (exclude_country)");
  PipelineConfig sub_cfg = cfg_;
  sub_cfg.workdir = cfg_.workdir / "exclude" / to_upper(country) / "work";
  sub_cfg.exclude_country.clear();
  Pipeline sub(sub_cfg);
  sub.training_exclusion_ = to_upper(country);
  for (Stage s : {Stage::Ingest, Stage::Hypergraph, Stage::Walks, Stage::Embed, Stage::Emergence, Stage::Prescience}) {
    sub.run(s);
  }

  ExclusionResult res;
  res.country = to_upper(country);
  ReportConfig rc;
  rc.attribution = cfg_.attribution;
  rc.top_pct = cfg_.top_pct;
  rc.field_filter = cfg_.field_filter;
  std::optional<CountryGroups> groups;
  if (!cfg_.country_groups.empty()) {
    groups = CountryGroups::load(cfg_.country_groups);
    rc.groups = &*groups;
  }
  const auto all = analysis_corpus();
  auto series_of = [&](const Pipeline& p, std::vector<CountrySeries>& out) {
    const auto rows = read_emergence_rows(p.artifact("emergence/papers.csv"));
    std::set<std::string> tags;
    for (const auto& r : rows) {
      if (r.tagged) tags.insert(r.paper_id);
    }
    auto s = build_series(Measure::Emergence, tags, subset(all, ids_of(rows)).all(), rc);
    out.insert(out.end(), s.begin(), s.end());
    for (Variant v : cfg_.variants) {
      const auto prow = read_prescience_rows(p.artifact(prescience_file(v)));
      std::set<std::string> ptags;
      for (const auto& r : prow) {
        if (r.prescient) ptags.insert(r.paper_id);
      }
      auto ps = build_series(v == Variant::Content ? Measure::ContentPrescience : Measure::ContextPrescience, ptags,
                             subset(all, ids_of(prow)).all(), rc);
      out.insert(out.end(), ps.begin(), ps.end());
    }
  };
  series_of(*this, res.full);
  series_of(sub, res.excluded);

  const auto [a, b] = analysis_years();
  const auto train = sub.training_corpus();
  for (const auto& f : all.field_labels()) {
    for (int y = a; y <= b; ++y) {
      if (!all.all().filter_year(y).filter_field(f).empty() && train.all().filter_year(y).filter_field(f).empty()) {
        res.undefined_cells.push_back(f + ":" + std::to_string(y));
      }
    }
  }
  return res;
}

std::vector<std::string> Pipeline::do_exclude(const std::string& stamp) {
  const auto res = exclusion_rerun(cfg_.exclude_country);
  const std::string dir = "exclude/" + res.country;
  export_series_csv(res.full, artifact(dir + "/full.csv"), stamp);
  export_series_csv(res.excluded, artifact(dir + "/excluded.csv"), stamp);
  CsvOut cells(stamp, {"field_year"});
  for (const auto& c : res.undefined_cells) cells.row({c});
  cells.save(artifact(dir + "/undefined_cells.csv"));
  return {dir + "/excluded.csv", dir + "/full.csv", dir + "/undefined_cells.csv"};
}

}  // namespace frontier
