#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frontier/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string workdir;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<double> top_pct;
  std::string attribution;
  std::string exclude_country;
  std::vector<std::string> variants;
  std::string years;
  std::string fixture;
  std::vector<std::string> sets;  // key=value
};

frontier::PipelineConfig build_config(const Overrides& o) {
  using frontier::PipelineConfig;
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
  // Command-line paths are relative to the working directory, not the config file.
  if (!o.workdir.empty()) cfg.set("workdir", o.workdir);
  if (!o.corpus.empty()) cfg.set("corpus", o.corpus);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (!o.mode.empty()) cfg.set("mode", o.mode);
  if (o.top_pct) cfg.set("top_pct", frontier::format_double(*o.top_pct));
  if (!o.attribution.empty()) cfg.set("attribution", o.attribution);
  if (!o.exclude_country.empty()) cfg.set("exclude_country", o.exclude_country);
  if (!o.variants.empty()) {
    std::string joined;
    for (const auto& v : o.variants) joined += (joined.empty() ? "" : ",") + v;
    cfg.set("variants", joined);
  }
  if (!o.years.empty()) cfg.set("years", o.years);
  if (!o.fixture.empty()) cfg.set("synth_fixture", o.fixture);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cfg.set(frontier::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void report(const frontier::StageOutcome& o, double seconds) {
  std::printf("%-11s %s  config_hash=%s  %.1fs\n", std::string(frontier::to_string(o.stage)).c_str(),
              o.skipped ? "up to date" : "done      ", o.key.c_str(), seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frontier: national research-frontier indicators from bibliographic corpora"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--workdir", o.workdir, "artifact directory");
  app.add_option("--corpus", o.corpus, "input corpus (JSONL)");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--mode", o.mode, "deterministic or parallel");
  app.add_option("--top-pct", o.top_pct, "paper tag threshold in (0, 1]");
  app.add_option("--attribution", o.attribution, "any, first, last, corresponding, unanimous");
  app.add_option("--exclude-country", o.exclude_country, "country code for the exclusion rerun");
  app.add_option("--variant", o.variants, "prescience variant (content, context); repeatable")
      ->check(CLI::IsMember({"content", "context"}));
  app.add_option("--years", o.years, "analysis years A..B");
  app.add_option("--set", o.sets, "any config key as key=value; repeatable");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the effective config and exit");

  const std::vector<std::pair<const char*, const char*>> stages = {
      {"ingest", "validate and normalize the corpus"},
      {"synth", "generate a synthetic corpus with ground truth"},
      {"hypergraph", "build per-year keyword-author hypergraphs"},
      {"walks", "sample random walks on each hypergraph"},
      {"embed", "train keyword embeddings from the walks"},
      {"emergence", "score keyword areas and tag emergent papers"},
      {"prescience", "fit factor models and score prescience"},
      {"disruption", "compute disruption indices"},
      {"report", "country share and rate series"},
      {"sweep", "threshold robustness sweep"},
      {"exclude", "country exclusion rerun"},
      {"all", "ingest through sweep"},
  };
  std::string chosen;
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    if (std::string(name) == "synth") sub->add_option("--fixture", o.fixture, "mini, standard, stationary, merging, citation, national, null, scaled:N, openalex:N");
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = build_config(o);
    if (print_config) {
      std::cout << cfg.to_text();
      return 0;
    }
    frontier::Pipeline pipeline(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [t0] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    if (chosen == "all") {
      for (frontier::Stage s : {frontier::Stage::Ingest, frontier::Stage::Hypergraph, frontier::Stage::Walks,
                                frontier::Stage::Embed, frontier::Stage::Emergence, frontier::Stage::Prescience,
                                frontier::Stage::Disruption, frontier::Stage::Report, frontier::Stage::Sweep}) {
        const double before = elapsed();
        const auto outcome = pipeline.run(s);
        report(outcome, elapsed() - before);
      }
    } else {
      const auto stage = frontier::parse_stage(chosen);
      if (stage == frontier::Stage::Exclude && cfg.exclude_country.empty()) {
        throw std::invalid_argument("exclude needs --exclude-country");
      }
      const auto outcome = pipeline.run(stage);
      report(outcome, elapsed());
    }
    return 0;
  } catch (const frontier::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
