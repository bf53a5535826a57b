// Copyright 2026 The ropasum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ropasum/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "ropasum/corpus.h"
#include "ropasum/diagnostics.h"
#include "ropasum/experiments.h"
#include "ropasum/gold.h"
#include "ropasum/hashing.h"
#include "ropasum/ledger.h"
#include "ropasum/llm_client.h"
#include "ropasum/metrics.h"
#include "ropasum/prompting.h"
#include "ropasum/stats.h"

namespace ropasum {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad input or configuration; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string corpus_path;
  std::uint64_t seed = 0;
  std::string provider = "echo_gold";
  std::string prompt_template_path;
  std::string cache_path;
  std::size_t workers = 1;
  std::size_t rate_limit = 0;
  std::string out_dir = "out";
  std::string model = "gpt-3.5-turbo";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string embedding = "hash";
  std::string embedding_endpoint = "https://api.openai.com/v1/embeddings";
  std::string config_path;
  std::vector<std::string> metrics;
};

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::vector<json> read_json_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<json> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw UsageError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

class OutputDir {
 public:
  explicit OutputDir(std::string dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& name) const {
    fs::create_directories(dir_);
    return dir_ / name;
  }

  fs::path write(const std::string& name, const std::string& content) const {
    fs::path p = path(name);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return p;
  }

  // Lists every file under the directory with its SHA-256.
  void write_manifest() const {
    if (!fs::exists(dir_)) return;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir_)) {
      if (!entry.is_regular_file()) continue;
      fs::path rel = fs::relative(entry.path(), dir_);
      if (rel == "manifest.json") continue;
      files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    json list = json::array();
    for (const fs::path& rel : files) {
      list.push_back({{"path", rel.generic_string()},
                      {"sha256", sha256_file((dir_ / rel).string())},
                      {"bytes", fs::file_size(dir_ / rel)}});
    }
    write("manifest.json", json{{"files", list}}.dump(2) + "\n");
  }

 private:
  fs::path dir_;
};

Category category_option(const std::string& text) {
  auto parsed = parse_category(text);
  if (!parsed) throw UsageError("unknown category " + text);
  return *parsed;
}

Corpus open_corpus(const GlobalOptions& g) {
  if (g.corpus_path.empty()) throw UsageError("--corpus is required");
  return load_corpus(g.corpus_path);
}

PromptTemplate open_template(const GlobalOptions& g) {
  if (g.prompt_template_path.empty()) return default_prompt_template();
  return load_prompt_template(g.prompt_template_path);
}

std::unique_ptr<ChatProvider> make_provider(const GlobalOptions& g,
                                            const Corpus& corpus) {
  if (g.provider == "echo_gold") {
    return std::make_unique<EchoGoldProvider>(gold_lookup(corpus));
  }
  const std::string corrupt = "corrupt_gold:";
  if (g.provider.rfind(corrupt, 0) == 0) {
    double p = 0.0;
    try {
      p = std::stod(g.provider.substr(corrupt.size()));
    } catch (const std::exception&) {
      throw UsageError("bad noise rate in " + g.provider);
    }
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("noise rate outside [0, 1]");
    return std::make_unique<CorruptGoldProvider>(gold_lookup(corpus), p,
                                                 g.seed);
  }
  if (g.provider == "live") {
    return HttpChatProvider::from_environment(g.endpoint, g.api_key_env);
  }
  throw UsageError("unknown provider " + g.provider +
                   " (expected live, echo_gold or corrupt_gold:<p>)");
}

std::unique_ptr<EmbeddingProvider> make_embedder(const GlobalOptions& g) {
  if (g.embedding == "hash") return std::make_unique<HashEmbeddingProvider>();
  if (g.embedding.rfind("hash:", 0) == 0) {
    std::size_t dim = std::stoul(g.embedding.substr(5));
    if (dim == 0) throw UsageError("embedding dimension must be positive");
    return std::make_unique<HashEmbeddingProvider>(dim);
  }
  if (g.embedding.rfind("remote:", 0) == 0) {
    const char* key = std::getenv(g.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ProviderError(ProviderError::Kind::kAuth,
                          "credential variable " + g.api_key_env +
                              " is not set");
    }
    return std::make_unique<HttpEmbeddingProvider>(
        g.embedding_endpoint, g.embedding.substr(7), key);
  }
  throw UsageError("unknown embedding " + g.embedding +
                   " (expected hash, hash:<dim> or remote:<model>)");
}

// Everything an experiment subcommand needs, built from the global flags.
struct Session {
  Corpus corpus;
  PromptTemplate tmpl;
  std::unique_ptr<ChatProvider> provider;
  std::unique_ptr<EmbeddingProvider> embedder;
  SystemClock clock;
  std::unique_ptr<CompletionClient> client;
  std::unique_ptr<ResponseCache> cache;
  RunSettings run;
  std::size_t workers = 1;

  explicit Session(const GlobalOptions& g)
      : corpus(open_corpus(g)), tmpl(open_template(g)) {
    provider = make_provider(g, corpus);
    embedder = make_embedder(g);
    ClientOptions options;
    options.retry.jitter_seed = g.seed;
    options.requests_per_minute = g.rate_limit;
    client = std::make_unique<CompletionClient>(*provider, options, clock);
    std::string cache_path = g.cache_path;
    if (cache_path.empty()) cache_path = OutputDir(g.out_dir).path("cache.jsonl");
    cache = std::make_unique<ResponseCache>(cache_path);
    run.seed = g.seed;
    run.model_id = g.model;
    run.prompt_template_hash = template_hash(tmpl);
    run.provider_id = provider->id();
    run.embedding_id = embedder->id();
    if (!g.metrics.empty()) {
      run = run_settings_from_json(json{{"metrics", g.metrics}}, run);
    }
    workers = std::max<std::size_t>(1, g.workers);
  }

  ExperimentEnv env() const {
    ExperimentEnv e;
    e.prompt_template = tmpl;
    e.client = client.get();
    e.cache = cache.get();
    e.embedder = embedder.get();
    e.workers = workers;
    return e;
  }
};

std::string ledger_path(const OutputDir& out, const std::string& given,
                        const std::string& experiment, Category category) {
  if (!given.empty()) return given;
  return out.path("ledger-" + experiment + "-" +
                  std::string(to_string(category)) + ".jsonl");
}

Category ledger_category(const LedgerHeader& header) {
  return category_option(header.config.value("category", "goal"));
}

// ---------------------------------------------------------------------------
// Corpus commands

void cmd_validate(const GlobalOptions& g, std::ostream& out) {
  Corpus corpus = open_corpus(g);
  json census = json::object();
  for (const auto& [category, count] : corpus.census()) {
    census[std::string(to_string(category))] = count;
    out << display_name(category) << ": " << count << "\n";
  }
  out << "scenarios: " << corpus.scenarios().size() << "\n";
  OutputDir(g.out_dir).write(
      "census.json",
      json{{"scenarios", corpus.scenarios().size()}, {"census", census}}
              .dump(2) +
          "\n");
}

void cmd_lint(const GlobalOptions& g, std::ostream& out) {
  Corpus corpus = open_corpus(g);
  std::string lines;
  for (const LintFinding& f : lint_corpus(corpus)) {
    out << f.code << " #" << f.annotation_index << ": " << f.message << "\n";
    lines += json{{"code", f.code},
                  {"annotation", f.annotation_index},
                  {"message", f.message}}
                 .dump() +
             "\n";
  }
  OutputDir(g.out_dir).write("lint.jsonl", lines);
}

void cmd_kappa(const GlobalOptions& g, std::ostream& out) {
  Corpus corpus = open_corpus(g);
  std::map<std::string, std::vector<const AnnotatorRecord*>> by_scenario;
  for (const AnnotatorRecord& r : corpus.annotator_records()) {
    by_scenario[r.scenario_id].push_back(&r);
  }
  using Pair = std::pair<std::string, std::string>;
  std::map<Pair, std::pair<std::vector<std::string>, std::vector<std::string>>>
      pooled;
  json scenarios = json::array();
  for (const auto& [scenario_id, records] : by_scenario) {
    const Scenario* scenario = corpus.find_scenario(scenario_id);
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (std::size_t j = i + 1; j < records.size(); ++j) {
        auto a = annotation_to_token_labels(*records[i], *scenario);
        auto b = annotation_to_token_labels(*records[j], *scenario);
        double kappa = cohen_kappa(a, b);
        scenarios.push_back({{"scenario_id", scenario_id},
                             {"annotator_a", records[i]->annotator_id},
                             {"annotator_b", records[j]->annotator_id},
                             {"tokens", a.size()},
                             {"kappa", kappa}});
        auto& [pa, pb] =
            pooled[{records[i]->annotator_id, records[j]->annotator_id}];
        pa.insert(pa.end(), a.begin(), a.end());
        pb.insert(pb.end(), b.begin(), b.end());
        out << scenario_id << " " << records[i]->annotator_id << "/"
            << records[j]->annotator_id << ": " << format_double(kappa)
            << "\n";
      }
    }
  }
  json pairs = json::array();
  for (const auto& [names, labels] : pooled) {
    double kappa = cohen_kappa(labels.first, labels.second);
    pairs.push_back({{"annotator_a", names.first},
                     {"annotator_b", names.second},
                     {"tokens", labels.first.size()},
                     {"kappa", kappa}});
    out << "pooled " << names.first << "/" << names.second << ": "
        << format_double(kappa) << "\n";
  }
  if (scenarios.empty()) out << "no annotator record pairs\n";
  OutputDir(g.out_dir).write(
      "kappa.json",
      json{{"scenarios", scenarios}, {"pooled", pairs}}.dump(2) + "\n");
}

void cmd_split(const GlobalOptions& g, const std::vector<std::string>& cats,
               std::ostream& out, std::ostream& err) {
  Corpus corpus = open_corpus(g);
  OutputDir dir(g.out_dir);
  std::vector<Category> categories;
  for (const std::string& c : cats) categories.push_back(category_option(c));
  if (categories.empty()) {
    categories.assign(kAllCategories.begin(), kAllCategories.end());
  }
  for (Category category : categories) {
    if (corpus.annotation_indices(category).size() < kMinSplitItems) {
      if (!cats.empty()) {
        throw UsageError(std::string(display_name(category)) +
                         " has too few annotations to split");
      }
      err << "skipping " << display_name(category)
          << ": fewer than " << kMinSplitItems << " annotations\n";
      continue;
    }
    DatasetSplit split = split_dataset(corpus, category, g.seed);
    out << display_name(category) << ": train " << split.train.size()
        << ", validation " << split.validation.size() << ", test "
        << split.test.size() << "\n";
    dir.write("split-" + std::string(to_string(category)) + ".json",
              split_to_json(split).dump(2) + "\n");
  }
}

void cmd_render_gold(const GlobalOptions& g, std::ostream& out,
                     std::ostream& err) {
  Corpus corpus = open_corpus(g);
  std::string lines;
  for (std::size_t i = 0; i < corpus.gold_annotations().size(); ++i) {
    std::vector<std::string> warnings;
    build_template(corpus.gold_annotations()[i], corpus, &warnings);
    for (const std::string& w : warnings) err << "#" << i << ": " << w << "\n";
    lines += gold_item_to_json(make_gold_item(corpus, i)).dump() + "\n";
  }
  OutputDir(g.out_dir).write("gold.jsonl", lines);
  out << corpus.gold_annotations().size() << " gold summaries\n";
}

// ---------------------------------------------------------------------------
// Experiments

struct SweepShotsArgs {
  std::string category = "goal";
  std::size_t max_shots = 10;
  std::size_t repetitions = 10;
  std::string ledger;
  CLI::Option* category_opt = nullptr;
  CLI::Option* max_shots_opt = nullptr;
  CLI::Option* repetitions_opt = nullptr;
};

void cmd_sweep_shots(const GlobalOptions& g, const SweepShotsArgs& a,
                     std::ostream& out) {
  Session session(g);
  ShotSweepConfig config;
  if (!g.config_path.empty()) {
    config = shot_sweep_config_from_json(read_json_file(g.config_path));
  }
  if (g.config_path.empty() || a.category_opt->count() > 0) {
    config.category = category_option(a.category);
  }
  if (g.config_path.empty() || a.max_shots_opt->count() > 0) {
    config.max_shots = a.max_shots;
  }
  if (g.config_path.empty() || a.repetitions_opt->count() > 0) {
    config.repetitions = a.repetitions;
  }
  if (config.repetitions < 1) throw UsageError("repetitions must be >= 1");
  std::vector<std::string> metrics = config.run.metrics;
  config.run = session.run;
  if (g.metrics.empty()) config.run.metrics = metrics;

  OutputDir dir(g.out_dir);
  CategoryData data = prepare_category(session.corpus, config.category, g.seed);
  if (config.max_shots > data.train.size()) {
    throw UsageError("max_shots " + std::to_string(config.max_shots) +
                     " exceeds the " + std::to_string(data.train.size()) +
                     "-item training pool");
  }
  LedgerWriter ledger(
      ledger_path(dir, a.ledger, "sweep-shots", config.category),
      make_header(config));
  ExperimentEnv env = session.env();
  ShotSweepResult result = run_shot_sweep(config, data, env, ledger);

  json doc = shot_sweep_to_json(result, config.run.metrics);
  doc["category"] = to_string(config.category);
  doc["config_hash"] = ledger.header().config_hash;
  dir.write("sweep-shots-" + std::string(to_string(config.category)) +
                ".json",
            doc.dump(2) + "\n");
  for (std::size_t k = 0; k < result.cells.size(); ++k) {
    std::vector<MetricReport> means;
    for (const RepetitionResult& cell : result.cells[k]) {
      means.push_back(cell.mean);
    }
    MetricReport m = mean_report(means);
    out << "shots " << k << ":";
    for (const std::string& name : config.run.metrics) {
      out << " " << name << "=" << format_double(m.get(name).f1);
    }
    out << "\n";
  }
  if (result.failures > 0) out << "failed items: " << result.failures << "\n";
}

struct SweepPermsArgs {
  std::string category = "goal";
  std::size_t shots = 0;
  std::uint64_t limit = 0;
  bool allow_full = false;
  std::string ledger;
};

void cmd_sweep_perms(const GlobalOptions& g, const SweepPermsArgs& a,
                     std::ostream& out) {
  Session session(g);
  PermutationSweepConfig config;
  config.category = category_option(a.category);
  config.shots = a.shots;
  if (a.limit > 0) config.limit = a.limit;
  config.allow_full_factorial = a.allow_full;
  config.run = session.run;

  OutputDir dir(g.out_dir);
  CategoryData data = prepare_category(session.corpus, config.category, g.seed);
  LedgerWriter ledger(
      ledger_path(dir, a.ledger, "sweep-perms", config.category),
      make_header(config));
  ExperimentEnv env = session.env();
  const std::string cat(to_string(config.category));
  std::ofstream csv(dir.path("permutations-" + cat + ".csv"),
                    std::ios::trunc);
  csv << "rank,ordering,mean_rouge_l\n";
  auto sink = [&](const PermutationResult& r) {
    csv << r.index << ",";
    for (std::size_t i = 0; i < r.ordering.size(); ++i) {
      csv << (i ? " " : "") << r.ordering[i];
    }
    csv << "," << format_double(r.mean_rouge_l) << "\n";
  };
  PermutationSweepSummary summary =
      run_permutation_sweep(config, data, env, ledger, sink);
  csv.close();
  json doc = permutation_summary_to_json(summary);
  doc["category"] = cat;
  doc["shots"] = config.shots;
  dir.write("sweep-perms-" + cat + ".json", doc.dump(2) + "\n");
  out << summary.count << " orderings; ROUGE-L mean "
      << format_double(summary.distribution.mean) << ", variance "
      << format_double(summary.distribution.variance) << "; best rank "
      << summary.best.index << "\n";
}

struct FinalEvalArgs {
  std::string category = "goal";
  std::size_t shots = 0;
  std::vector<std::size_t> ordering;
  std::string ledger;
};

void cmd_final_eval(const GlobalOptions& g, const FinalEvalArgs& a,
                    std::ostream& out) {
  Session session(g);
  FinalEvalConfig config;
  config.category = category_option(a.category);
  config.shots = a.shots;
  config.ordering = a.ordering;
  config.run = session.run;

  OutputDir dir(g.out_dir);
  CategoryData data = prepare_category(session.corpus, config.category, g.seed);
  LedgerWriter ledger(
      ledger_path(dir, a.ledger, "final-eval", config.category),
      make_header(config));
  ExperimentEnv env = session.env();
  FinalEvalRow row = run_final_eval(config, data, env, ledger);
  const std::string cat(to_string(config.category));
  dir.write("final-eval-" + cat + ".json",
            final_row_to_json(row, config.run.metrics).dump(2) + "\n");
  out << display_name(config.category) << " (" << row.items << " items, "
      << row.shots << " shots):";
  for (const std::string& name : config.run.metrics) {
    out << " " << name << "=" << format_double(row.mean.get(name).f1);
  }
  out << "\n";
}

void cmd_evaluate(const GlobalOptions& g, const std::string& input,
                  std::ostream& out) {
  std::unique_ptr<EmbeddingProvider> embedder = make_embedder(g);
  std::vector<MetricReport> reports;
  std::string lines;
  for (const json& row : read_json_lines(input)) {
    if (!row.contains("reference") || !row.contains("candidate")) {
      throw UsageError("each line needs reference and candidate");
    }
    MetricReport report =
        evaluate_pair(row["reference"].get<std::string>(),
                      row["candidate"].get<std::string>(), *embedder);
    lines += json{{"line", reports.size() + 1},
                  {"metrics", report_to_json(report)}}
                 .dump() +
             "\n";
    reports.push_back(report);
  }
  MetricReport mean = mean_report(reports);
  OutputDir dir(g.out_dir);
  dir.write("evaluate.jsonl", lines);
  dir.write("evaluate-mean.json",
            json{{"pairs", reports.size()}, {"mean", report_to_json(mean)}}
                    .dump(2) +
                "\n");
  RunSettings shown;
  if (!g.metrics.empty()) {
    shown = run_settings_from_json(json{{"metrics", g.metrics}}, shown);
  }
  for (const std::string& name : shown.metrics) {
    out << name << " F1 " << format_double(mean.get(name).f1) << "\n";
  }
}

void cmd_diagnose(const GlobalOptions& g, const std::string& ledger_file,
                  const std::string& overrides_file, bool review,
                  std::ostream& out) {
  Corpus corpus = open_corpus(g);
  LedgerContents contents = read_ledger(ledger_file);
  std::map<std::string, CodeSet> overrides;
  if (!overrides_file.empty()) {
    for (const json& row : read_json_lines(overrides_file)) {
      if (!row.contains("key")) throw UsageError("override line lacks key");
      if (!row.contains("codes") || row["codes"].is_null()) continue;
      overrides[row["key"].get<std::string>()] = codes_from_json(row["codes"]);
    }
  }
  std::set<std::string> lexicon = build_verb_lexicon(corpus);
  std::vector<DiagnosisReport> reports;
  std::string lines;
  std::string review_lines;
  std::size_t skipped = 0;
  for (const LedgerRecord& record : contents.records) {
    if (record.failed) {
      ++skipped;
      continue;
    }
    if (record.annotation_index >= corpus.gold_annotations().size()) {
      throw UsageError("ledger refers to annotation " +
                       std::to_string(record.annotation_index) +
                       " missing from the corpus");
    }
    SummaryTemplate gold =
        build_template(corpus.gold_annotations()[record.annotation_index],
                       corpus);
    DiagnosisReport report = diagnose(record.raw_response, gold,
                                      corpus.sentence(record.item), lexicon);
    report.annotation_index = record.annotation_index;
    auto it = overrides.find(record.key());
    if (it != overrides.end()) report.review_codes = it->second;
    json row = diagnosis_to_json(report);
    row["key"] = record.key();
    lines += row.dump() + "\n";
    if (review) {
      json codes = json::array();
      for (DiscrepancyCode c : report.codes) codes.push_back(to_string(c));
      review_lines += json{{"key", record.key()},
                           {"input", record.input},
                           {"gold", record.reference},
                           {"generated", record.raw_response},
                           {"automatic_codes", codes},
                           {"codes", nullptr}}
                          .dump() +
                      "\n";
    }
    reports.push_back(std::move(report));
  }
  OutputDir dir(g.out_dir);
  dir.write("diagnosis.jsonl", lines);
  if (review) dir.write("review.jsonl", review_lines);
  if (reports.empty()) throw UsageError("no diagnosable records in ledger");
  RatioTable table = aggregate_ratios(reports);
  json doc = {{"items", table.items},
              {"overridden", overrides.size()},
              {"skipped_failed", skipped},
              {"codes", ratio_table_to_json(table)}};
  dir.write("ratios.json", doc.dump(2) + "\n");
  for (DiscrepancyCode code : kAllDiscrepancyCodes) {
    out << static_cast<int>(code) << " " << to_string(code) << ": "
        << table.format(code) << "\n";
  }
}

struct ReportArgs {
  std::vector<std::string> ledgers;
  double threshold = kDefaultSeThreshold;
  std::string metric = "rougeL";
  std::string se_mode = "pooled";
};

void cmd_report(const GlobalOptions& g, const ReportArgs& a,
                std::ostream& out) {
  if (std::find(kMetricNames.begin(), kMetricNames.end(), a.metric) ==
      kMetricNames.end()) {
    throw UsageError("unknown metric " + a.metric);
  }
  if (!(a.threshold > 0.0)) throw UsageError("threshold must be positive");
  SeMode mode = SeMode::kPooled;
  if (a.se_mode == "within") {
    mode = SeMode::kWithinShot;
  } else if (a.se_mode != "pooled") {
    throw UsageError("se mode must be pooled or within");
  }

  std::string table1 = "category,shots";
  for (std::string_view name : kMetricNames) table1 += "," + std::string(name);
  table1 += "\n";
  std::string table2 = "category,shots,items" +
                       table1.substr(std::string("category,shots").size());
  std::string se_csv = "category,shots,mean,standard_error,n,threshold\n";
  json boxplots = json::object();
  json selected = json::object();
  json permutations = json::object();
  bool have_table2 = false;

  for (const std::string& path : a.ledgers) {
    LedgerContents contents = read_ledger(path);
    const std::string cat(to_string(ledger_category(contents.header)));
    const std::string& experiment = contents.header.experiment;
    if (experiment == "sweep-shots") {
      ShotSweepResult result = aggregate_shot_sweep(contents.records);
      json per_shot = json::array();
      for (std::size_t k = 0; k < result.cells.size(); ++k) {
        std::vector<MetricReport> means;
        std::vector<double> values;
        for (const RepetitionResult& cell : result.cells[k]) {
          means.push_back(cell.mean);
          values.push_back(cell.mean.get(a.metric).f1);
        }
        MetricReport m = mean_report(means);
        table1 += cat + "," + std::to_string(k);
        for (std::string_view name : kMetricNames) {
          table1 += "," + format_double(m.get(name).f1);
        }
        table1 += "\n";
        per_shot.push_back(
            {{"shots", k}, {"summary", boxplot_to_json(boxplot_summary(values))}});
      }
      boxplots[cat] = {{"metric", a.metric}, {"shots", per_shot}};
      if (!result.cells.empty() && result.cells.front().size() >= 2) {
        auto curve = se_curve(result.rep_means(a.metric), mode);
        for (const SECurvePoint& p : curve) {
          se_csv += cat + "," + std::to_string(p.shots) + "," +
                    format_double(p.mean) + "," +
                    format_double(p.standard_error) + "," +
                    std::to_string(p.n) + "," + format_double(a.threshold) +
                    "\n";
        }
        ShotSelection s = select_shot_count(curve, a.threshold);
        selected[cat] = {{"shots", s.shots},
                         {"threshold_met", s.threshold_met},
                         {"threshold", a.threshold}};
        out << display_name(ledger_category(contents.header))
            << ": selected " << s.shots << " shots"
            << (s.threshold_met ? "" : " (threshold unmet)") << "\n";
      }
    } else if (experiment == "sweep-perms") {
      PermutationSweepSummary s = aggregate_permutations(contents.records);
      permutations[cat] = permutation_summary_to_json(s);
    } else if (experiment == "final-eval") {
      FinalEvalRow row =
          aggregate_final_eval(contents.records, ledger_category(contents.header));
      table2 += cat + "," + std::to_string(row.shots) + "," +
                std::to_string(row.items);
      for (std::string_view name : kMetricNames) {
        table2 += "," + format_double(row.mean.get(name).f1);
      }
      table2 += "\n";
      have_table2 = true;
    } else {
      throw UsageError(path + ": unknown experiment " + experiment);
    }
  }
  OutputDir dir(g.out_dir);
  dir.write("table1.csv", table1);
  if (have_table2) dir.write("table2.csv", table2);
  dir.write("se_curve.csv", se_csv);
  dir.write("boxplots.json",
            json{{"shot_sweeps", boxplots}, {"permutations", permutations}}
                    .dump(2) +
                "\n");
  dir.write("selected_shots.json", selected.dump(2) + "\n");
}

int cmd_replay(const GlobalOptions& g, const std::string& ledger_file,
               std::ostream& out) {
  LedgerContents contents = read_ledger(ledger_file);
  std::unique_ptr<EmbeddingProvider> embedder = make_embedder(g);
  const std::string& recorded = contents.header.config.value("embedding", "");
  if (!recorded.empty() && recorded != embedder->id()) {
    throw UsageError("ledger was scored with embedding " + recorded +
                     ", not " + embedder->id());
  }
  ReplayReport report = replay_ledger(contents, *embedder);
  OutputDir(g.out_dir).write(
      "replay-" + fs::path(ledger_file).stem().string() + ".json",
      json{{"experiment", report.experiment},
           {"records", report.records},
           {"metric_mismatches", report.metric_mismatches},
           {"identical", report.identical()},
           {"recorded", report.recorded_aggregate},
           {"replayed", report.replayed_aggregate}}
              .dump(2) +
          "\n");
  out << report.experiment << ": " << report.records << " records, "
      << report.metric_mismatches << " metric mismatches, aggregates "
      << (report.identical() ? "identical" : "DIFFER") << "\n";
  return report.identical() ? kExitOk : kExitValidation;
}

struct CostArgs {
  std::vector<std::string> categories;
  std::size_t max_shots = 10;
  std::size_t repetitions = 10;
  std::uint32_t max_output_units = 256;
  double price_per_1k = 0.002;
};

void cmd_estimate_cost(const GlobalOptions& g, const CostArgs& a,
                       std::ostream& out) {
  Corpus corpus = open_corpus(g);
  PromptTemplate tmpl = open_template(g);
  std::vector<Category> categories;
  for (const std::string& c : a.categories) {
    categories.push_back(category_option(c));
  }
  if (categories.empty()) {
    categories.assign(kAllCategories.begin(), kAllCategories.end());
  }
  std::vector<PricedPrompt> prompts;
  for (Category category : categories) {
    CategoryData data = prepare_category(corpus, category, g.seed);
    std::size_t shots = std::min(a.max_shots, data.train.size());
    ExampleSet pool = select_examples(data.train, shots, g.seed);
    for (std::size_t k = 0; k <= shots; ++k) {
      ExampleSet set;
      set.examples.assign(pool.examples.begin(), pool.examples.begin() + k);
      for (const GoldItem& item : data.validation) {
        std::string prompt = build_prompt({tmpl, set, item.input});
        for (std::size_t r = 0; r < a.repetitions; ++r) {
          prompts.push_back({std::string(to_string(category)), prompt});
        }
      }
    }
  }
  CostEstimate estimate =
      estimate_sweep_cost(prompts, a.max_output_units, a.price_per_1k);
  json doc = {{"calls", prompts.size()},
              {"total_units", estimate.total_units},
              {"total_cost", estimate.total_cost},
              {"units_by_dataset", estimate.units_by_dataset},
              {"cost_by_dataset", estimate.cost_by_dataset}};
  OutputDir(g.out_dir).write("cost-estimate.json", doc.dump(2) + "\n");
  for (const auto& [name, units] : estimate.units_by_dataset) {
    out << name << ": " << units << " units, $"
        << format_double(estimate.cost_by_dataset.at(name)) << "\n";
  }
  out << "total: " << prompts.size() << " calls, " << estimate.total_units
      << " units, $" << format_double(estimate.total_cost) << "\n";
}

// Fills global options the user did not set from the --config file.
void apply_config_defaults(GlobalOptions& g, const CLI::App& app) {
  if (g.config_path.empty()) return;
  json config = read_json_file(g.config_path);
  auto unset = [&](const char* flag) { return app.count(flag) == 0; };
  if (unset("--seed") && config.contains("seed")) {
    g.seed = config["seed"].get<std::uint64_t>();
  }
  if (unset("--model") && config.contains("model")) {
    g.model = config["model"].get<std::string>();
  }
  if (unset("--provider") && config.contains("provider")) {
    g.provider = config["provider"].get<std::string>();
  }
  if (unset("--embedding") && config.contains("embedding")) {
    g.embedding = config["embedding"].get<std::string>();
  }
  if (unset("--metrics") && config.contains("metrics")) {
    g.metrics = config["metrics"].get<std::vector<std::string>>();
  }
  if (unset("--workers") && config.contains("workers")) {
    g.workers = config["workers"].get<std::size_t>();
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Extractive summarization experiment harness"};
  app.name("ropasum");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--corpus", g.corpus_path, "Annotated corpus JSON");
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--provider", g.provider,
                 "live, echo_gold or corrupt_gold:<p>");
  app.add_option("--prompt-template", g.prompt_template_path,
                 "Prompt template JSON");
  app.add_option("--cache", g.cache_path,
                 "Response cache (default <out-dir>/cache.jsonl)");
  app.add_option("--workers", g.workers, "Concurrent provider calls");
  app.add_option("--rate-limit", g.rate_limit,
                 "Requests per minute, 0 for none");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--model", g.model, "Model identifier");
  app.add_option("--endpoint", g.endpoint, "Chat completion URL");
  app.add_option("--api-key-env", g.api_key_env,
                 "Environment variable holding the credential");
  app.add_option("--embedding", g.embedding,
                 "hash, hash:<dim> or remote:<model>");
  app.add_option("--embedding-endpoint", g.embedding_endpoint,
                 "Embedding URL for remote:<model>");
  app.add_option("--metrics", g.metrics, "Metrics to report");
  app.add_option("--config", g.config_path, "Experiment config JSON");

  std::function<int()> action;
  auto simple = [&](const char* name, const char* help,
                    std::function<void()> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&action, fn] {
      action = [fn] {
        fn();
        return kExitOk;
      };
    });
    return sub;
  };

  simple("validate", "Load the corpus and print its census",
         [&] { cmd_validate(g, out); });
  simple("lint", "Report heuristic findings", [&] { cmd_lint(g, out); });
  simple("kappa", "Agreement between annotator records",
         [&] { cmd_kappa(g, out); });

  std::vector<std::string> split_categories;
  simple("split", "Write the train/validation/test splits",
         [&] { cmd_split(g, split_categories, out, err); })
      ->add_option("--category", split_categories, "goal, step or dp");

  simple("render-gold", "Write marked inputs with gold summaries",
         [&] { cmd_render_gold(g, out, err); });

  SweepShotsArgs shots_args;
  CLI::App* sweep_shots =
      simple("sweep-shots", "Shot-count sweep over the validation set",
             [&] { cmd_sweep_shots(g, shots_args, out); });
  shots_args.category_opt =
      sweep_shots->add_option("--category", shots_args.category);
  shots_args.max_shots_opt =
      sweep_shots->add_option("--max-shots", shots_args.max_shots);
  shots_args.repetitions_opt =
      sweep_shots->add_option("--repetitions", shots_args.repetitions);
  sweep_shots->add_option("--ledger", shots_args.ledger, "Ledger path");

  SweepPermsArgs perm_args;
  CLI::App* sweep_perms =
      simple("sweep-perms", "Example-ordering sweep",
             [&] { cmd_sweep_perms(g, perm_args, out); });
  sweep_perms->add_option("--category", perm_args.category);
  sweep_perms->add_option("--shots", perm_args.shots)->required();
  sweep_perms->add_option("--limit", perm_args.limit,
                          "Sample this many orderings");
  sweep_perms->add_flag("--i-know-the-cost", perm_args.allow_full,
                        "Allow a full sweep beyond the budget guard");
  sweep_perms->add_option("--ledger", perm_args.ledger, "Ledger path");

  FinalEvalArgs final_args;
  CLI::App* final_eval =
      simple("final-eval", "Score one prompt configuration on the test set",
             [&] { cmd_final_eval(g, final_args, out); });
  final_eval->add_option("--category", final_args.category);
  final_eval->add_option("--shots", final_args.shots)->required();
  final_eval->add_option("--ordering", final_args.ordering,
                         "Example order, e.g. 2,0,1")
      ->delimiter(',');
  final_eval->add_option("--ledger", final_args.ledger, "Ledger path");

  std::string evaluate_input;
  simple("evaluate", "Score reference/candidate JSON lines",
         [&] { cmd_evaluate(g, evaluate_input, out); })
      ->add_option("--input", evaluate_input)
      ->required();

  std::string diagnose_ledger;
  std::string diagnose_overrides;
  bool diagnose_review = false;
  CLI::App* diagnose_cmd =
      simple("diagnose", "Code discrepancies in a ledger's outputs", [&] {
        cmd_diagnose(g, diagnose_ledger, diagnose_overrides, diagnose_review,
                     out);
      });
  diagnose_cmd->add_option("--ledger", diagnose_ledger)->required();
  diagnose_cmd->add_option("--overrides", diagnose_overrides,
                           "Reviewed codes as JSON lines {key, codes}");
  diagnose_cmd->add_flag("--review", diagnose_review,
                         "Also write side-by-side pairs for review");

  ReportArgs report_args;
  CLI::App* report = simple("report", "Tables, box plots and SE curves",
                            [&] { cmd_report(g, report_args, out); });
  report->add_option("--ledger", report_args.ledgers)->required();
  report->add_option("--threshold", report_args.threshold);
  report->add_option("--metric", report_args.metric);
  report->add_option("--se-mode", report_args.se_mode, "pooled or within");

  std::string replay_ledger_path;
  CLI::App* replay = app.add_subcommand("replay", "Recompute a ledger");
  replay->add_option("--ledger", replay_ledger_path)->required();
  replay->callback([&] {
    action = [&] { return cmd_replay(g, replay_ledger_path, out); };
  });

  CostArgs cost_args;
  CLI::App* cost = simple("estimate-cost", "Price a shot sweep",
                          [&] { cmd_estimate_cost(g, cost_args, out); });
  cost->add_option("--category", cost_args.categories);
  cost->add_option("--max-shots", cost_args.max_shots);
  cost->add_option("--repetitions", cost_args.repetitions);
  cost->add_option("--max-output-units", cost_args.max_output_units);
  cost->add_option("--price-per-1k", cost_args.price_per_1k);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    apply_config_defaults(g, app);
    int code = action();
    OutputDir(g.out_dir).write_manifest();
    return code;
  } catch (const CorpusError& e) {
    err << "corpus error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const LedgerMismatchError& e) {
    err << "ledger error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const BudgetGuardError& e) {
    err << "budget guard: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const SweepAborted& e) {
    err << "sweep aborted: " << e.what() << "; partial ledger kept\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace ropasum
