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

#include "ropasum/experiments.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "ropasum/hashing.h"

namespace ropasum {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

json run_to_json(const RunSettings& run) {
  return {{"seed", run.seed},
          {"model", run.model_id},
          {"temperature", run.temperature},
          {"max_output_units", run.max_output_units},
          {"prompt_template_hash", run.prompt_template_hash},
          {"provider", run.provider_id},
          {"embedding", run.embedding_id},
          {"metrics", run.metrics}};
}

Category category_from_json(const json& value, Category fallback) {
  if (!value.is_string()) return fallback;
  auto parsed = parse_category(value.get<std::string>());
  if (!parsed) {
    throw std::invalid_argument("unknown category " + value.get<std::string>());
  }
  return *parsed;
}

}  // namespace

json config_to_json(const ShotSweepConfig& c) {
  json out = run_to_json(c.run);
  out["experiment"] = "sweep-shots";
  out["category"] = to_string(c.category);
  out["max_shots"] = c.max_shots;
  out["repetitions"] = c.repetitions;
  return out;
}

json config_to_json(const PermutationSweepConfig& c) {
  json out = run_to_json(c.run);
  out["experiment"] = "sweep-perms";
  out["category"] = to_string(c.category);
  out["shots"] = c.shots;
  out["limit"] = c.limit ? json(*c.limit) : json();
  out["allow_full_factorial"] = c.allow_full_factorial;
  out["budget_guard"] = c.budget_guard;
  return out;
}

json config_to_json(const FinalEvalConfig& c) {
  json out = run_to_json(c.run);
  out["experiment"] = "final-eval";
  out["category"] = to_string(c.category);
  out["shots"] = c.shots;
  out["ordering"] = c.ordering;
  return out;
}

RunSettings run_settings_from_json(const json& v, RunSettings run) {
  if (!v.is_object()) throw std::invalid_argument("config must be an object");
  run.seed = v.value("seed", run.seed);
  run.model_id = v.value("model", run.model_id);
  run.temperature = v.value("temperature", run.temperature);
  run.max_output_units = v.value("max_output_units", run.max_output_units);
  run.prompt_template_hash =
      v.value("prompt_template_hash", run.prompt_template_hash);
  run.provider_id = v.value("provider", run.provider_id);
  run.embedding_id = v.value("embedding", run.embedding_id);
  if (v.contains("metrics")) {
    run.metrics = v["metrics"].get<std::vector<std::string>>();
    for (const std::string& m : run.metrics) {
      if (std::find(kMetricNames.begin(), kMetricNames.end(), m) ==
          kMetricNames.end()) {
        throw std::invalid_argument("unknown metric " + m);
      }
    }
  }
  if (run.temperature < 0.0) {
    throw std::invalid_argument("temperature must be non-negative");
  }
  return run;
}

ShotSweepConfig shot_sweep_config_from_json(const json& v) {
  ShotSweepConfig c;
  c.run = run_settings_from_json(v);
  c.category = category_from_json(v.value("category", json()), c.category);
  c.max_shots = v.value("max_shots", c.max_shots);
  c.repetitions = v.value("repetitions", c.repetitions);
  if (c.repetitions < 1) {
    throw std::invalid_argument("repetitions must be at least 1");
  }
  return c;
}

std::string config_hash(const json& config) {
  return sha256_hex(config.dump());
}

LedgerHeader make_header(const ShotSweepConfig& c) {
  json j = config_to_json(c);
  return {"sweep-shots", config_hash(j), c.run.prompt_template_hash, j};
}

LedgerHeader make_header(const PermutationSweepConfig& c) {
  json j = config_to_json(c);
  return {"sweep-perms", config_hash(j), c.run.prompt_template_hash, j};
}

LedgerHeader make_header(const FinalEvalConfig& c) {
  json j = config_to_json(c);
  return {"final-eval", config_hash(j), c.run.prompt_template_hash, j};
}

// ---------------------------------------------------------------------------
// Data

CategoryData prepare_category(const Corpus& corpus, Category category,
                              std::uint64_t seed) {
  CategoryData data;
  data.split = split_dataset(corpus, category, seed);
  data.train = make_gold_items(corpus, data.split.train);
  data.validation = make_gold_items(corpus, data.split.validation);
  data.test = make_gold_items(corpus, data.split.test);
  return data;
}

std::unordered_map<std::string, std::string> gold_lookup(const Corpus& corpus) {
  std::unordered_map<std::string, std::string> out;
  for (std::size_t i = 0; i < corpus.gold_annotations().size(); ++i) {
    GoldItem item = make_gold_item(corpus, i);
    out.emplace(std::move(item.input), std::move(item.gold));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&] {
    while (!stop.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::size_t threads = std::clamp<std::size_t>(workers, 1, n);
  if (threads == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

MetricReport mean_report(std::span<const MetricReport> reports) {
  MetricReport mean;
  if (reports.empty()) return mean;
  const double n = static_cast<double>(reports.size());
  for (std::string_view name : kMetricNames) {
    ScoreTriple sum;
    for (const MetricReport& r : reports) {
      sum.precision += r.get(name).precision;
      sum.recall += r.get(name).recall;
      sum.f1 += r.get(name).f1;
    }
    mean.get(name) = ScoreTriple{sum.precision / n, sum.recall / n, sum.f1 / n};
  }
  return mean;
}

namespace {

struct PendingCall {
  LedgerRecord record;
  std::vector<Example> const* examples = nullptr;
  std::uint64_t cache_repetition = 0;
};

class CallRunner {
 public:
  CallRunner(ExperimentEnv& env, LedgerWriter& ledger, const RunSettings& run)
      : env_(env), ledger_(ledger), run_(run) {
    if (env.client == nullptr || env.cache == nullptr ||
        env.embedder == nullptr) {
      throw std::invalid_argument("experiment environment is incomplete");
    }
  }

  LedgerRecord execute(LedgerRecord record, const ExampleSet& examples,
                       std::uint64_t cache_repetition) {
    if (auto existing = ledger_.find(record.key())) return *existing;
    if (env_.max_new_calls && new_calls_.fetch_add(1) >= *env_.max_new_calls) {
      throw SweepAborted("interrupted after " +
                         std::to_string(*env_.max_new_calls) + " calls");
    }
    PromptSpec spec{env_.prompt_template, examples, record.input};
    ChatRequest request;
    request.model_id = run_.model_id;
    request.temperature = run_.temperature;
    request.max_output_units = run_.max_output_units;
    request.messages.push_back({Role::kUser, build_prompt(spec)});

    record.started_ms = unix_millis();
    try {
      ChatResponse response =
          env_.client->cached_complete(request, *env_.cache, cache_repetition);
      record.raw_response = response.text;
      record.from_cache = response.from_cache;
      record.metrics =
          evaluate_pair(record.reference, record.raw_response, *env_.embedder);
    } catch (const ProviderError& e) {
      if (e.kind() == ProviderError::Kind::kExhausted ||
          e.kind() == ProviderError::Kind::kAuth) {
        throw SweepAborted(std::string("provider failure: ") + e.what());
      }
      mark_failed(record, e.what());
    } catch (const std::exception& e) {
      mark_failed(record, e.what());
    }
    record.finished_ms = unix_millis();
    ledger_.append(record);
    return record;
  }

 private:
  static void mark_failed(LedgerRecord& record, const std::string& error) {
    record.failed = true;
    record.error = error;
    record.metrics = MetricReport{};
  }

  ExperimentEnv& env_;
  LedgerWriter& ledger_;
  const RunSettings& run_;
  std::atomic<std::size_t> new_calls_{0};
};

LedgerRecord base_record(const LedgerHeader& header, const GoldItem& item,
                         std::size_t position, std::size_t shots) {
  LedgerRecord r;
  r.experiment = header.experiment;
  r.config_hash = header.config_hash;
  r.prompt_hash = header.prompt_hash;
  r.item = item.sentence;
  r.annotation_index = item.annotation_index;
  r.position = position;
  r.shots = shots;
  r.input = item.input;
  r.reference = item.gold;
  return r;
}

ExampleSet prefix(const ExampleSet& pool, std::size_t k) {
  ExampleSet out;
  out.source_seed = pool.source_seed;
  out.examples.assign(pool.examples.begin(),
                      pool.examples.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

void check_header(const LedgerWriter& ledger, const LedgerHeader& expected) {
  if (ledger.header().config_hash != expected.config_hash) {
    throw LedgerMismatchError("ledger config hash " +
                              ledger.header().config_hash +
                              " does not match run config " +
                              expected.config_hash);
  }
}

std::vector<LedgerRecord> sorted_by_position(std::vector<LedgerRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const LedgerRecord& a, const LedgerRecord& b) {
              return a.position < b.position;
            });
  return records;
}

double mean_rouge_l(std::span<const LedgerRecord> by_position) {
  double sum = 0.0;
  for (const LedgerRecord& r : by_position) sum += r.metrics.rougeL.f1;
  return by_position.empty() ? 0.0
                             : sum / static_cast<double>(by_position.size());
}

// Reduces permutation results in rank order.
class PermutationReducer {
 public:
  explicit PermutationReducer(
      const std::function<void(const PermutationResult&)>& sink)
      : sink_(sink) {}

  void add(std::uint64_t rank, const std::vector<std::size_t>& ordering,
           std::span<const LedgerRecord> by_position) {
    PermutationResult result{rank, ordering, mean_rouge_l(by_position)};
    for (const LedgerRecord& r : by_position) failures_ += r.failed ? 1 : 0;
    summary_.add(result.mean_rouge_l);
    if (!have_best_ || result.mean_rouge_l > best_.mean_rouge_l) {
      best_ = result;
      have_best_ = true;
    }
    if (sink_) sink_(result);
  }

  PermutationSweepSummary finish() const {
    PermutationSweepSummary out;
    out.count = summary_.count();
    if (out.count > 0) {
      out.distribution = summary_.summary();
      out.quartiles_exact = summary_.quartiles_exact();
    }
    out.best = best_;
    out.failures = failures_;
    return out;
  }

 private:
  const std::function<void(const PermutationResult&)>& sink_;
  StreamingSummary summary_;
  PermutationResult best_;
  bool have_best_ = false;
  std::size_t failures_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Aggregation

std::vector<std::vector<double>> ShotSweepResult::rep_means(
    std::string_view metric) const {
  std::vector<std::vector<double>> out;
  for (const auto& row : cells) {
    std::vector<double> values;
    for (const RepetitionResult& cell : row) {
      values.push_back(cell.mean.get(metric).f1);
    }
    out.push_back(std::move(values));
  }
  return out;
}

ShotSweepResult aggregate_shot_sweep(std::span<const LedgerRecord> records) {
  std::size_t shots = 0;
  std::size_t reps = 0;
  std::size_t items = 0;
  for (const LedgerRecord& r : records) {
    shots = std::max(shots, r.shots + 1);
    reps = std::max<std::size_t>(reps, r.repetition.value_or(0) + 1);
    items = std::max(items, r.position + 1);
  }
  ShotSweepResult result;
  result.cells.resize(shots);
  for (std::size_t k = 0; k < shots; ++k) {
    result.cells[k].resize(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      RepetitionResult& cell = result.cells[k][rep];
      cell.shots = k;
      cell.repetition = rep;
      cell.item_reports.resize(items);
      // Missing records count as failed items.
      cell.failed.assign(items, true);
    }
  }
  for (const LedgerRecord& r : records) {
    RepetitionResult& cell = result.cells[r.shots][r.repetition.value_or(0)];
    cell.item_reports[r.position] = r.metrics;
    cell.failed[r.position] = r.failed;
  }
  for (auto& row : result.cells) {
    for (RepetitionResult& cell : row) {
      cell.mean = mean_report(cell.item_reports);
      result.failures += static_cast<std::size_t>(
          std::count(cell.failed.begin(), cell.failed.end(), true));
    }
  }
  return result;
}

PermutationSweepSummary aggregate_permutations(
    std::span<const LedgerRecord> records,
    const std::function<void(const PermutationResult&)>& sink) {
  std::map<std::uint64_t, std::vector<LedgerRecord>> by_rank;
  for (const LedgerRecord& r : records) {
    by_rank[r.permutation.value_or(0)].push_back(r);
  }
  PermutationReducer reducer(sink);
  for (auto& [rank, group] : by_rank) {
    std::vector<LedgerRecord> sorted = sorted_by_position(std::move(group));
    reducer.add(rank, sorted.front().ordering, sorted);
  }
  return reducer.finish();
}

FinalEvalRow aggregate_final_eval(std::span<const LedgerRecord> records,
                                  Category category) {
  std::vector<LedgerRecord> sorted =
      sorted_by_position({records.begin(), records.end()});
  FinalEvalRow row;
  row.category = category;
  row.items = sorted.size();
  std::vector<MetricReport> reports;
  for (const LedgerRecord& r : sorted) {
    reports.push_back(r.metrics);
    row.failures += r.failed ? 1 : 0;
    row.shots = r.shots;
    row.ordering = r.ordering;
  }
  row.mean = mean_report(reports);
  return row;
}

// ---------------------------------------------------------------------------
// Experiments

ShotSweepResult run_shot_sweep(const ShotSweepConfig& config,
                               const CategoryData& data, ExperimentEnv& env,
                               LedgerWriter& ledger) {
  if (config.repetitions < 1) {
    throw std::invalid_argument("repetitions must be at least 1");
  }
  if (config.max_shots > data.train.size()) {
    throw std::invalid_argument("max_shots exceeds the training pool");
  }
  const LedgerHeader header = make_header(config);
  check_header(ledger, header);

  const ExampleSet pool =
      select_examples(data.train, config.max_shots, config.run.seed);
  std::vector<ExampleSet> by_shots;
  for (std::size_t k = 0; k <= config.max_shots; ++k) {
    by_shots.push_back(prefix(pool, k));
  }

  const std::size_t items = data.validation.size();
  const std::size_t per_shot = config.repetitions * items;
  const std::size_t total = (config.max_shots + 1) * per_shot;
  CallRunner runner(env, ledger, config.run);
  parallel_for(total, env.workers, [&](std::size_t i) {
    std::size_t k = i / per_shot;
    std::size_t rep = (i % per_shot) / items;
    std::size_t pos = i % items;
    LedgerRecord record = base_record(header, data.validation[pos], pos, k);
    record.repetition = rep;
    for (std::size_t e = 0; e < k; ++e) record.ordering.push_back(e);
    runner.execute(std::move(record), by_shots[k], rep);
  });
  std::vector<LedgerRecord> records = ledger.records();
  return aggregate_shot_sweep(records);
}

PermutationSweepSummary run_permutation_sweep(
    const PermutationSweepConfig& config, const CategoryData& data,
    ExperimentEnv& env, LedgerWriter& ledger,
    const std::function<void(const PermutationResult&)>& sink) {
  if (config.shots < 1) throw std::invalid_argument("need at least one shot");
  if (config.shots > data.train.size()) {
    throw std::invalid_argument("shots exceed the training pool");
  }
  const std::uint64_t all = factorial(config.shots);
  if (!config.limit && all > config.budget_guard &&
      !config.allow_full_factorial) {
    throw BudgetGuardError(
        std::to_string(config.shots) + "! = " + std::to_string(all) +
        " orderings exceeds the budget guard of " +
        std::to_string(config.budget_guard) +
        "; pass a limit or explicitly allow the full sweep");
  }
  const LedgerHeader header = make_header(config);
  check_header(ledger, header);

  const ExampleSet examples =
      select_examples(data.train, config.shots, config.run.seed);
  PermutationStream stream =
      enumerate_permutations(examples, config.limit, config.run.seed);
  const std::size_t items = data.validation.size();
  const std::size_t batch_orderings =
      std::max<std::size_t>(1, 4096 / std::max<std::size_t>(1, items));

  CallRunner runner(env, ledger, config.run);
  PermutationReducer reducer(sink);
  while (true) {
    std::vector<Ordering> batch;
    while (batch.size() < batch_orderings) {
      std::optional<Ordering> next = stream.next();
      if (!next) break;
      batch.push_back(std::move(*next));
    }
    if (batch.empty()) break;
    std::vector<LedgerRecord> results(batch.size() * items);
    parallel_for(results.size(), env.workers, [&](std::size_t i) {
      const Ordering& ordering = batch[i / items];
      std::size_t pos = i % items;
      LedgerRecord record =
          base_record(header, data.validation[pos], pos, config.shots);
      record.permutation = ordering.rank;
      record.ordering = ordering.order;
      results[i] = runner.execute(std::move(record), ordering.examples, 0);
    });
    for (std::size_t o = 0; o < batch.size(); ++o) {
      std::span<const LedgerRecord> group(results.data() + o * items, items);
      reducer.add(batch[o].rank, batch[o].order, group);
    }
  }
  return reducer.finish();
}

FinalEvalRow run_final_eval(const FinalEvalConfig& config,
                            const CategoryData& data, ExperimentEnv& env,
                            LedgerWriter& ledger) {
  if (config.shots > data.train.size()) {
    throw std::invalid_argument("shots exceed the training pool");
  }
  const LedgerHeader header = make_header(config);
  check_header(ledger, header);

  ExampleSet examples =
      select_examples(data.train, config.shots, config.run.seed);
  std::vector<std::size_t> ordering = config.ordering;
  if (ordering.empty()) {
    for (std::size_t i = 0; i < config.shots; ++i) ordering.push_back(i);
  }
  std::vector<std::size_t> check = ordering;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check.size() != config.shots || check[i] != i) {
      throw std::invalid_argument("ordering is not a permutation of 0..k-1");
    }
  }
  examples = reorder(examples, ordering);

  CallRunner runner(env, ledger, config.run);
  std::vector<LedgerRecord> results(data.test.size());
  parallel_for(results.size(), env.workers, [&](std::size_t pos) {
    LedgerRecord record =
        base_record(header, data.test[pos], pos, config.shots);
    record.repetition = 0;
    record.ordering = ordering;
    results[pos] = runner.execute(std::move(record), examples, 0);
  });
  return aggregate_final_eval(results, config.category);
}

// ---------------------------------------------------------------------------
// Reporting

namespace {

json triple_json(const ScoreTriple& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json selected_metrics(const MetricReport& report,
                      std::span<const std::string> metrics) {
  json out = json::object();
  for (const std::string& m : metrics) out[m] = triple_json(report.get(m));
  return out;
}

}  // namespace

json shot_sweep_to_json(const ShotSweepResult& result,
                        std::span<const std::string> metrics) {
  json shots = json::array();
  for (std::size_t k = 0; k < result.cells.size(); ++k) {
    json reps = json::array();
    for (const RepetitionResult& cell : result.cells[k]) {
      reps.push_back({{"repetition", cell.repetition},
                      {"mean", selected_metrics(cell.mean, metrics)}});
    }
    shots.push_back({{"shots", k}, {"repetitions", std::move(reps)}});
  }
  return {{"cells", std::move(shots)}, {"failures", result.failures}};
}

json permutation_summary_to_json(const PermutationSweepSummary& s) {
  return {{"count", s.count},
          {"distribution", boxplot_to_json(s.distribution)},
          {"quartiles_exact", s.quartiles_exact},
          {"best",
           {{"index", s.best.index},
            {"ordering", s.best.ordering},
            {"mean_rouge_l", s.best.mean_rouge_l}}},
          {"failures", s.failures}};
}

json final_row_to_json(const FinalEvalRow& row,
                       std::span<const std::string> metrics) {
  return {{"category", to_string(row.category)},
          {"shots", row.shots},
          {"ordering", row.ordering},
          {"items", row.items},
          {"failures", row.failures},
          {"mean", selected_metrics(row.mean, metrics)}};
}

ReplayReport replay_ledger(const LedgerContents& contents,
                           EmbeddingProvider& embedder) {
  ReplayReport report;
  report.experiment = contents.header.experiment;
  report.records = contents.records.size();
  std::vector<LedgerRecord> replayed = contents.records;
  for (LedgerRecord& r : replayed) {
    if (r.failed) continue;
    MetricReport fresh = evaluate_pair(r.reference, r.raw_response, embedder);
    if (report_to_json(fresh).dump() != report_to_json(r.metrics).dump()) {
      ++report.metric_mismatches;
    }
    r.metrics = fresh;
  }
  const std::vector<std::string> all(kMetricNames.begin(), kMetricNames.end());
  auto aggregate = [&](const std::vector<LedgerRecord>& records) -> json {
    const std::string& e = contents.header.experiment;
    if (e == "sweep-shots") {
      return shot_sweep_to_json(aggregate_shot_sweep(records), all);
    }
    if (e == "sweep-perms") {
      return permutation_summary_to_json(aggregate_permutations(records));
    }
    if (e == "final-eval") {
      Category category = category_from_json(
          contents.header.config.value("category", json()), Category::kGoal);
      return final_row_to_json(aggregate_final_eval(records, category), all);
    }
    throw std::invalid_argument("unknown experiment " + e);
  };
  report.recorded_aggregate = aggregate(contents.records);
  report.replayed_aggregate = aggregate(replayed);
  return report;
}

}  // namespace ropasum
