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

#ifndef ROPASUM_METRICS_H_
#define ROPASUM_METRICS_H_

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ropasum {

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // F1 is the harmonic mean, 0 when P + R = 0.
  static ScoreTriple from(double precision, double recall);
  // P = overlap / candidate_count, R = overlap / reference_count; a zero
  // count gives a zero score on that side.
  static ScoreTriple from_counts(double overlap, double candidate_count,
                                 double reference_count);
};

inline constexpr std::array<std::string_view, 6> kMetricNames = {
    "rouge1", "rouge2", "rougeL", "rougeS", "meteor", "bertscore"};

// All six scores for one (reference, candidate) pair. For METEOR the f1 slot
// holds the METEOR score; precision and recall are its unigram P and R.
struct MetricReport {
  ScoreTriple rouge1;
  ScoreTriple rouge2;
  ScoreTriple rougeL;
  ScoreTriple rougeS;
  ScoreTriple meteor;
  ScoreTriple bertscore;

  const ScoreTriple& get(std::string_view name) const;
  ScoreTriple& get(std::string_view name);
};

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& value);

using Tokens = std::span<const std::string>;

ScoreTriple rouge_n(Tokens reference, Tokens candidate, std::size_t n);
std::size_t lcs_length(Tokens a, Tokens b);
ScoreTriple rouge_l(Tokens reference, Tokens candidate);
// Skip-bigrams are ordered pairs (i < j) with at most `max_skip` tokens
// between them; nullopt means unlimited.
ScoreTriple rouge_s(Tokens reference, Tokens candidate,
                    std::optional<std::size_t> max_skip = std::nullopt);

// Suffix stemmer used by METEOR's second stage (ies, ing, ed, es, s).
std::string meteor_stem(std::string_view word);

struct MeteorAlignment {
  std::size_t exact_matches = 0;
  std::size_t stem_matches = 0;
  std::size_t chunks = 0;
  // (candidate index, reference index), sorted by candidate index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  bool exhaustive = true;  // false if the search hit its node budget
};

// Staged alignment: maximize exact matches, then minimize their chunks, then
// maximize stem matches, then minimize total chunks.
MeteorAlignment meteor_align(Tokens reference, Tokens candidate);
// Returns P, R and the METEOR score in the f1 slot.
ScoreTriple meteor(Tokens reference, Tokens candidate);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  // One vector per token, all of the same dimension.
  virtual std::vector<std::vector<double>> embed(Tokens tokens) = 0;
};

// Testing-only embedder: each token maps to a pseudo-random vector derived
// from its hash. Identical tokens embed identically; nothing else about the
// geometry carries meaning.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension = 64,
                                 std::uint64_t seed = 0);
  std::string id() const override;
  std::vector<std::vector<double>> embed(Tokens tokens) override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

// Remote embedder: POST {"model","input":[tokens]} and read
// data[i].embedding, the common embeddings wire format.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string url, std::string model,
                        std::string api_key,
                        std::chrono::seconds timeout = std::chrono::seconds(60));
  std::string id() const override { return "remote:" + model_; }
  std::vector<std::vector<double>> embed(Tokens tokens) override;

 private:
  std::string url_;
  std::string model_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

// Greedy cosine matching; recall averages over reference tokens, precision
// over candidate tokens. No IDF weighting, no baseline rescaling. Scores are
// clamped into [0, 1].
ScoreTriple bert_score(Tokens reference, Tokens candidate,
                       EmbeddingProvider& provider);

// Normalizes both strings (see normalize_text) and computes every metric.
MetricReport evaluate_pair(std::string_view reference,
                           std::string_view candidate,
                           EmbeddingProvider& provider);
MetricReport evaluate_tokens(Tokens reference, Tokens candidate,
                             EmbeddingProvider& provider);

}  // namespace ropasum

#endif  // ROPASUM_METRICS_H_
