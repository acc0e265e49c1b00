#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "frontier/corpus.hpp"
#include "frontier/ingest.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return FRONTIER_TEST_DATA; }

inline frontier::Corpus mini_corpus() {
  static const frontier::Corpus c = frontier::ingest(data_dir() / "mini_corpus.jsonl").corpus;
  return c;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("frontier_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

struct Author {
  std::string id;
  std::vector<std::string> countries;
  bool corresponding = false;
};

inline frontier::PaperRecord paper(std::string id, int year, std::vector<std::string> keywords = {},
                                   std::vector<Author> authors = {}, std::vector<std::string> fields = {"f"}) {
  frontier::PaperRecord p;
  p.paper_id = std::move(id);
  p.year = year;
  p.keywords = std::move(keywords);
  int pos = 0;
  for (auto& a : authors) {
    frontier::AuthorRef r;
    r.author_id = a.id;
    r.countries = {a.countries.begin(), a.countries.end()};
    r.position = pos++;
    r.is_corresponding = a.corresponding;
    p.authors.push_back(std::move(r));
  }
  p.fields = std::move(fields);
  return p;
}

}  // namespace testing
