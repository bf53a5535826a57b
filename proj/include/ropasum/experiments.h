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

#ifndef ROPASUM_EXPERIMENTS_H_
#define ROPASUM_EXPERIMENTS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ropasum/corpus.h"
#include "ropasum/gold.h"
#include "ropasum/ledger.h"
#include "ropasum/llm_client.h"
#include "ropasum/metrics.h"
#include "ropasum/prompting.h"
#include "ropasum/stats.h"

namespace ropasum {

// Settings shared by every experiment; all of them enter the config hash.
struct RunSettings {
  std::uint64_t seed = 0;
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.0;
  std::uint32_t max_output_units = 256;
  std::string prompt_template_hash;
  std::string provider_id;
  std::string embedding_id;
  // Metrics shown in reports. Every MetricReport still carries all six.
  std::vector<std::string> metrics{kMetricNames.begin(), kMetricNames.end()};
};

struct ShotSweepConfig {
  Category category = Category::kGoal;
  std::size_t max_shots = 10;
  std::size_t repetitions = 10;
  RunSettings run;
};

inline constexpr std::uint64_t kPermutationBudgetGuard = 50'000;

struct PermutationSweepConfig {
  Category category = Category::kGoal;
  std::size_t shots = 0;
  std::optional<std::uint64_t> limit;
  bool allow_full_factorial = false;
  std::uint64_t budget_guard = kPermutationBudgetGuard;
  RunSettings run;
};

struct FinalEvalConfig {
  Category category = Category::kGoal;
  std::size_t shots = 0;
  std::vector<std::size_t> ordering;  // empty = selection order
  RunSettings run;
};

nlohmann::json config_to_json(const ShotSweepConfig& config);
nlohmann::json config_to_json(const PermutationSweepConfig& config);
nlohmann::json config_to_json(const FinalEvalConfig& config);
// Reads the flat experiment config file format. Missing keys keep defaults.
ShotSweepConfig shot_sweep_config_from_json(const nlohmann::json& value);
RunSettings run_settings_from_json(const nlohmann::json& value,
                                   RunSettings defaults = {});
std::string config_hash(const nlohmann::json& config);

// A category's split with its items rendered for prompting.
struct CategoryData {
  DatasetSplit split;
  std::vector<GoldItem> train;
  std::vector<GoldItem> validation;
  std::vector<GoldItem> test;
};

CategoryData prepare_category(const Corpus& corpus, Category category,
                              std::uint64_t seed);

// Marked input -> gold summary for every gold annotation; feeds the offline
// providers.
std::unordered_map<std::string, std::string> gold_lookup(const Corpus& corpus);

// Shared machinery for one experiment run.
struct ExperimentEnv {
  PromptTemplate prompt_template;
  CompletionClient* client = nullptr;
  ResponseCache* cache = nullptr;
  EmbeddingProvider* embedder = nullptr;
  std::size_t workers = 1;
  // Stop dispatching after this many provider-backed calls; simulates a
  // crash in tests. Records written so far stay in the ledger.
  std::optional<std::size_t> max_new_calls;
};

class SweepAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `task(i)` for i in [0, n) on up to `workers` threads. The first
// exception stops further dispatch and is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& task);

// Mean P, R and F1 per metric, summed in input order.
MetricReport mean_report(std::span<const MetricReport> reports);

struct RepetitionResult {
  std::size_t shots = 0;
  std::size_t repetition = 0;
  std::vector<MetricReport> item_reports;  // validation order
  std::vector<bool> failed;
  MetricReport mean;
};

struct ShotSweepResult {
  // cells[k][r]
  std::vector<std::vector<RepetitionResult>> cells;
  std::size_t failures = 0;

  // rep_means[k][r] of one metric's F1, ready for se_curve().
  std::vector<std::vector<double>> rep_means(std::string_view metric) const;
};

struct PermutationResult {
  std::uint64_t index = 0;
  std::vector<std::size_t> ordering;
  double mean_rouge_l = 0.0;
};

struct PermutationSweepSummary {
  std::size_t count = 0;
  BoxplotSummary distribution;
  bool quartiles_exact = true;
  PermutationResult best;
  std::size_t failures = 0;
};

struct FinalEvalRow {
  Category category = Category::kGoal;
  std::size_t shots = 0;
  std::vector<std::size_t> ordering;
  std::size_t items = 0;
  std::size_t failures = 0;
  MetricReport mean;
};

// Aggregations over ledger records. The run functions use these too, so a
// replayed ledger reproduces their output exactly.
ShotSweepResult aggregate_shot_sweep(std::span<const LedgerRecord> records);
PermutationSweepSummary aggregate_permutations(
    std::span<const LedgerRecord> records,
    const std::function<void(const PermutationResult&)>& sink = {});
FinalEvalRow aggregate_final_eval(std::span<const LedgerRecord> records,
                                  Category category);

LedgerHeader make_header(const ShotSweepConfig& config);
LedgerHeader make_header(const PermutationSweepConfig& config);
LedgerHeader make_header(const FinalEvalConfig& config);

// Experiment 1: one prompt per validation item for every shot count 0..S,
// repeated R times; resumable through the ledger.
ShotSweepResult run_shot_sweep(const ShotSweepConfig& config,
                               const CategoryData& data, ExperimentEnv& env,
                               LedgerWriter& ledger);

// Experiment 2: every (or a sampled set of) ordering of the k-shot example
// set, each scored on the validation items. Orderings are processed in
// batches and reduced in rank order, so memory does not grow with k!.
PermutationSweepSummary run_permutation_sweep(
    const PermutationSweepConfig& config, const CategoryData& data,
    ExperimentEnv& env, LedgerWriter& ledger,
    const std::function<void(const PermutationResult&)>& sink = {});

// One prompt configuration applied to every test item.
FinalEvalRow run_final_eval(const FinalEvalConfig& config,
                            const CategoryData& data, ExperimentEnv& env,
                            LedgerWriter& ledger);

nlohmann::json shot_sweep_to_json(const ShotSweepResult& result,
                                  std::span<const std::string> metrics);
nlohmann::json permutation_summary_to_json(const PermutationSweepSummary& s);
nlohmann::json final_row_to_json(const FinalEvalRow& row,
                                 std::span<const std::string> metrics);

struct ReplayReport {
  std::string experiment;
  std::size_t records = 0;
  std::size_t metric_mismatches = 0;
  nlohmann::json recorded_aggregate;
  nlohmann::json replayed_aggregate;

  bool identical() const {
    return metric_mismatches == 0 &&
           recorded_aggregate.dump() == replayed_aggregate.dump();
  }
};

// Recomputes every MetricReport from the recorded raw responses and
// rebuilds the experiment aggregate from both versions.
ReplayReport replay_ledger(const LedgerContents& contents,
                           EmbeddingProvider& embedder);

}  // namespace ropasum

#endif  // ROPASUM_EXPERIMENTS_H_
