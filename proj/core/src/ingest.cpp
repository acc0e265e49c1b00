#include "frontier/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "frontier/util.hpp"
#include "json.hpp"

namespace frontier {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& reason) { throw std::invalid_argument(reason); }

std::vector<std::string> normalized_list(const json& j, const char* name) {
  std::vector<std::string> out;
  if (!j.contains(name) || j[name].is_null()) return out;
  if (!j[name].is_array()) reject(std::string(name) + " is not an array");
  std::unordered_set<std::string> seen;
  for (const auto& v : j[name]) {
    if (!v.is_string()) reject(std::string(name) + " entries must be strings");
    auto k = normalize_keyword(v.get<std::string>());
    if (!k.empty() && seen.insert(k).second) out.push_back(std::move(k));
  }
  return out;
}

bool valid_country(const std::string& c) {
  if (c == kUnknownCountry) return true;
  if (c.size() < 2 || c.size() > 3) return false;
  return std::all_of(c.begin(), c.end(), [](char ch) { return ch >= 'A' && ch <= 'Z'; });
}

std::set<std::string> country_set(const json& arr) {
  std::set<std::string> out;
  if (arr.is_null()) return out;
  if (!arr.is_array()) reject("countries is not an array");
  for (const auto& v : arr) {
    if (!v.is_string()) reject("country codes must be strings");
    auto c = to_upper(trim(v.get<std::string>()));
    if (c.empty()) continue;
    if (!valid_country(c)) reject("invalid country code '" + c + "'");
    if (c != kUnknownCountry) out.insert(std::move(c));
  }
  return out;
}

void finalize(PaperRecord& p) {
  std::vector<std::string> refs;
  std::unordered_set<std::string> seen;
  for (auto& r : p.references) {
    if (r.empty() || r == p.paper_id) continue;
    if (seen.insert(r).second) refs.push_back(std::move(r));
  }
  p.references = std::move(refs);
  if (p.authors.empty()) reject("no authors");
  std::set<int> positions;
  for (const auto& a : p.authors) {
    if (a.author_id.empty()) reject("empty author_id");
    if (!positions.insert(a.position).second) reject("duplicate author position");
  }
  std::stable_sort(p.authors.begin(), p.authors.end(),
                   [](const AuthorRef& a, const AuthorRef& b) { return a.position < b.position; });
}

json parse_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    reject(std::string("malformed json: ") + e.what());
  }
  if (!j.is_object()) reject("record is not an object");
  return j;
}

std::string strip_openalex_prefix(std::string id) {
  constexpr std::string_view kPrefix = "https://openalex.org/";
  if (id.rfind(kPrefix, 0) == 0) id.erase(0, kPrefix.size());
  return id;
}

}  // namespace

PaperRecord parse_record(std::string_view line) {
  const json j = parse_json_line(line);
  PaperRecord p;
  try {
    if (!j.contains("paper_id") || !j["paper_id"].is_string()) reject("missing paper_id");
    p.paper_id = j["paper_id"].get<std::string>();
    if (p.paper_id.empty()) reject("empty paper_id");
    if (!j.contains("year") || !j["year"].is_number_integer()) reject("missing or non-integer year");
    p.year = j["year"].get<int>();
    p.keywords = normalized_list(j, "keywords");
    p.ref_venues = normalized_list(j, "ref_venues");
    if (j.contains("references") && !j["references"].is_null()) {
      if (!j["references"].is_array()) reject("references is not an array");
      for (const auto& r : j["references"]) {
        if (!r.is_string()) reject("references entries must be strings");
        p.references.push_back(r.get<std::string>());
      }
    }
    if (!j.contains("authors") || !j["authors"].is_array()) reject("missing authors");
    int next_pos = 0;
    for (const auto& a : j["authors"]) {
      if (!a.is_object()) reject("author entry is not an object");
      AuthorRef ref;
      if (!a.contains("author_id") || !a["author_id"].is_string()) reject("author without author_id");
      ref.author_id = a["author_id"].get<std::string>();
      if (a.contains("countries")) ref.countries = country_set(a["countries"]);
      ref.position = a.contains("position") && a["position"].is_number_integer() ? a["position"].get<int>() : next_pos;
      next_pos = ref.position + 1;
      ref.is_corresponding = a.contains("is_corresponding") && a["is_corresponding"].is_boolean() &&
                             a["is_corresponding"].get<bool>();
      p.authors.push_back(std::move(ref));
    }
    if (j.contains("field") && !j["field"].is_null()) {
      const auto& f = j["field"];
      if (f.is_string()) {
        auto label = trim(f.get<std::string>());
        if (!label.empty()) p.fields.push_back(label);
      } else if (f.is_array()) {
        for (const auto& v : f) {
          if (!v.is_string()) reject("field entries must be strings");
          auto label = trim(v.get<std::string>());
          if (!label.empty() && !p.in_field(label)) p.fields.push_back(label);
        }
      } else {
        reject("field must be a string or array");
      }
    }
    if (j.contains("is_review")) {
      if (!j["is_review"].is_boolean()) reject("is_review must be boolean");
      p.is_review = j["is_review"].get<bool>();
    }
    if (j.contains("language") && j["language"].is_string()) p.language = normalize_keyword(j["language"].get<std::string>());
    if (j.contains("citation_count") && !j["citation_count"].is_null()) {
      if (!j["citation_count"].is_number_integer() || j["citation_count"].get<std::int64_t>() < 0) {
        reject("citation_count must be a nonnegative integer");
      }
      p.citation_count = j["citation_count"].get<std::int64_t>();
    }
  } catch (const json::exception& e) {
    reject(std::string("bad field type: ") + e.what());
  }
  finalize(p);
  return p;
}

PaperRecord parse_openalex_record(std::string_view line, int min_concept_level) {
  const json j = parse_json_line(line);
  PaperRecord p;
  try {
    if (!j.contains("id") || !j["id"].is_string()) reject("missing id");
    p.paper_id = strip_openalex_prefix(j["id"].get<std::string>());
    if (!j.contains("publication_year") || !j["publication_year"].is_number_integer()) reject("missing publication_year");
    p.year = j["publication_year"].get<int>();
    std::unordered_set<std::string> seen;
    auto add_keyword = [&](const std::string& raw) {
      auto k = normalize_keyword(raw);
      if (!k.empty() && seen.insert(k).second) p.keywords.push_back(std::move(k));
    };
    if (j.contains("concepts") && j["concepts"].is_array()) {
      for (const auto& c : j["concepts"]) {
        const int level = c.value("level", 0);
        if (min_concept_level >= 0 && level < min_concept_level) continue;
        if (c.contains("display_name") && c["display_name"].is_string()) add_keyword(c["display_name"].get<std::string>());
      }
    }
    if (j.contains("keywords") && j["keywords"].is_array()) {
      for (const auto& k : j["keywords"]) {
        if (k.is_string()) add_keyword(k.get<std::string>());
        else if (k.is_object() && k.contains("display_name")) add_keyword(k["display_name"].get<std::string>());
      }
    }
    if (j.contains("referenced_works") && j["referenced_works"].is_array()) {
      for (const auto& r : j["referenced_works"]) {
        if (r.is_string()) p.references.push_back(strip_openalex_prefix(r.get<std::string>()));
      }
    }
    if (!j.contains("authorships") || !j["authorships"].is_array()) reject("missing authorships");
    const auto& ships = j["authorships"];
    for (std::size_t i = 0; i < ships.size(); ++i) {
      const auto& s = ships[i];
      AuthorRef a;
      if (s.contains("author") && s["author"].is_object() && s["author"].contains("id") && s["author"]["id"].is_string()) {
        a.author_id = strip_openalex_prefix(s["author"]["id"].get<std::string>());
      } else {
        reject("authorship without author id");
      }
      if (s.contains("countries") && s["countries"].is_array()) {
        a.countries = country_set(s["countries"]);
      } else if (s.contains("institutions") && s["institutions"].is_array()) {
        for (const auto& inst : s["institutions"]) {
          if (inst.contains("country_code") && inst["country_code"].is_string()) {
            auto c = to_upper(inst["country_code"].get<std::string>());
            if (valid_country(c) && c != kUnknownCountry) a.countries.insert(c);
          }
        }
      }
      a.position = static_cast<int>(i);
      a.is_corresponding = s.contains("is_corresponding") && s["is_corresponding"].is_boolean() &&
                           s["is_corresponding"].get<bool>();
      p.authors.push_back(std::move(a));
    }
    if (j.contains("primary_topic") && j["primary_topic"].is_object()) {
      const auto& t = j["primary_topic"];
      if (t.contains("field") && t["field"].is_object() && t["field"].contains("display_name")) {
        p.fields.push_back(t["field"]["display_name"].get<std::string>());
      }
    }
    if (p.fields.empty() && j.contains("concepts") && j["concepts"].is_array()) {
      double best = -1.0;
      std::string label;
      for (const auto& c : j["concepts"]) {
        if (c.value("level", -1) == 0 && c.value("score", 0.0) > best) {
          best = c.value("score", 0.0);
          label = c.value("display_name", "");
        }
      }
      if (!label.empty()) p.fields.push_back(label);
    }
    p.is_review = j.value("type", std::string("article")) == "review";
    if (j.contains("language") && j["language"].is_string()) p.language = normalize_keyword(j["language"].get<std::string>());
    if (j.contains("cited_by_count") && j["cited_by_count"].is_number_integer()) {
      p.citation_count = std::max<std::int64_t>(0, j["cited_by_count"].get<std::int64_t>());
    }
  } catch (const json::exception& e) {
    reject(std::string("bad field type: ") + e.what());
  }
  finalize(p);
  return p;
}

namespace {

// OpenAlex works carry their own source but not their references' sources;
// resolve context nodes from the referenced records present in the file.
std::string openalex_venue(std::string_view line) {
  try {
    auto j = json::parse(line.begin(), line.end());
    const auto& loc = j.at("primary_location");
    const auto& src = loc.at("source");
    if (src.is_object() && src.contains("display_name") && src["display_name"].is_string()) {
      return normalize_keyword(src["display_name"].get<std::string>());
    }
  } catch (const json::exception&) {
  }
  return {};
}

IngestResult ingest_lines(std::istream& in, const IngestOptions& options) {
  const bool openalex = options.schema_version == kSchemaOpenAlex;
  if (!openalex && options.schema_version != kSchemaNative) {
    throw std::invalid_argument("unsupported schema_version: " + options.schema_version);
  }
  IngestResult result;
  std::vector<PaperRecord> records;
  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, std::string> venues;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      PaperRecord p = openalex ? parse_openalex_record(line, options.openalex_min_concept_level) : parse_record(line);
      if ((options.min_year && p.year < *options.min_year) || (options.max_year && p.year > *options.max_year)) {
        reject("year " + std::to_string(p.year) + " outside corpus range");
      }
      if (!ids.insert(p.paper_id).second) reject("duplicate paper_id " + p.paper_id);
      if (options.taxonomy) options.taxonomy->apply(p);
      if (openalex) {
        auto v = openalex_venue(line);
        if (!v.empty()) venues.emplace(p.paper_id, std::move(v));
      }
      records.push_back(std::move(p));
    } catch (const std::invalid_argument& e) {
      result.rejections.push_back({lineno, e.what()});
    }
  }
  if (openalex) {
    for (auto& p : records) {
      std::unordered_set<std::string> seen(p.ref_venues.begin(), p.ref_venues.end());
      for (const auto& r : p.references) {
        auto it = venues.find(r);
        if (it != venues.end() && seen.insert(it->second).second) p.ref_venues.push_back(it->second);
      }
    }
  }
  result.corpus = Corpus(std::move(records));
  return result;
}

}  // namespace

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read corpus file " + path.string());
  return ingest_lines(in, options);
}

IngestResult ingest_text(std::string_view text, const IngestOptions& options) {
  std::istringstream in{std::string(text)};
  return ingest_lines(in, options);
}

std::string record_to_json(const PaperRecord& p) {
  json j;
  j["paper_id"] = p.paper_id;
  j["year"] = p.year;
  j["keywords"] = p.keywords;
  j["ref_venues"] = p.ref_venues;
  j["references"] = p.references;
  json authors = json::array();
  for (const auto& a : p.authors) {
    authors.push_back({{"author_id", a.author_id},
                       {"countries", std::vector<std::string>(a.countries.begin(), a.countries.end())},
                       {"position", a.position},
                       {"is_corresponding", a.is_corresponding}});
  }
  j["authors"] = std::move(authors);
  if (p.fields.size() == 1) j["field"] = p.fields.front();
  else j["field"] = p.fields;
  j["is_review"] = p.is_review;
  j["language"] = p.language;
  if (p.citation_count) j["citation_count"] = *p.citation_count;
  else j["citation_count"] = nullptr;
  return j.dump();
}

std::string export_jsonl_text(const Corpus& c) {
  std::string out;
  for (const auto& r : c.records()) {
    out += record_to_json(r);
    out.push_back('\n');
  }
  return out;
}

void export_jsonl(const Corpus& c, const std::filesystem::path& path) { write_text_file(path, export_jsonl_text(c)); }

void write_rejections_csv(std::span<const Rejection> rejections, const std::filesystem::path& path) {
  std::string out = "line,reason\n";
  for (const auto& r : rejections) {
    const std::string fields[] = {std::to_string(r.line), r.reason};
    out += csv_row(fields);
  }
  write_text_file(path, out);
}

}  // namespace frontier
