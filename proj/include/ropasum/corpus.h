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

#ifndef ROPASUM_CORPUS_H_
#define ROPASUM_CORPUS_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ropasum {

enum class Category { kGoal, kStep, kDp };
enum class Actor { kUser, kApp, kExternal };
enum class ArgumentKind { kDataType, kPurpose, kExternalEntity, kUiComponent };

inline constexpr std::array<Category, 3> kAllCategories = {
    Category::kGoal, Category::kStep, Category::kDp};

// Wire names used in corpus files and CLI flags: "goal", "step", "dp", ...
std::string_view to_string(Category category);
std::string_view to_string(Actor actor);
std::string_view to_string(ArgumentKind kind);
// Display names used in token labels: "Goal", "DP", "DataType", ...
std::string_view display_name(Category category);
std::string_view display_name(ArgumentKind kind);

std::optional<Category> parse_category(std::string_view text);
std::optional<Actor> parse_actor(std::string_view text);
std::optional<ArgumentKind> parse_argument_kind(std::string_view text);

// Raised for every corpus defect that blocks loading. `pointer` is a JSON
// pointer into the offending document ("" when not applicable).
class CorpusError : public std::runtime_error {
 public:
  enum class Kind { kIo, kSchema, kDanglingReference, kOutOfRange };

  CorpusError(Kind kind, std::string pointer, const std::string& message);

  Kind kind() const { return kind_; }
  const std::string& pointer() const { return pointer_; }

 private:
  Kind kind_;
  std::string pointer_;
};

struct Token {
  std::string text;
  std::size_t index = 0;
};

// Inclusive token range within one sentence.
struct TokenRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start + 1; }
  bool valid_for(std::size_t token_count) const {
    return start <= end && end < token_count;
  }
  bool overlaps(const TokenRange& other) const {
    return start <= other.end && other.start <= end;
  }
  bool contains(std::size_t i) const { return start <= i && i <= end; }
  friend auto operator<=>(const TokenRange&, const TokenRange&) = default;
};

struct SentenceRef {
  std::string scenario_id;
  std::size_t sentence_index = 0;
  friend auto operator<=>(const SentenceRef&, const SentenceRef&) = default;
};

struct Sentence {
  std::string scenario_id;
  std::size_t sentence_index = 0;
  std::vector<Token> tokens;

  std::vector<std::string> texts() const;
  // Tokens joined with single spaces.
  std::string surface() const;
  std::string surface(const TokenRange& range) const;
};

struct Scenario {
  std::string id;
  std::optional<std::string> app_name;
  std::string raw_text;
  std::vector<Sentence> sentences;

  std::size_t token_count() const;
};

struct ArgumentSpan {
  ArgumentKind kind = ArgumentKind::kDataType;
  TokenRange range;
};

struct ActionAnnotation {
  SentenceRef sentence;
  TokenRange verb_range;
  std::string verb_lemma;
  Category category = Category::kGoal;
  Actor actor = Actor::kUser;
  std::string actor_name;
  std::vector<ArgumentSpan> arguments;
};

struct AnnotatorRecord {
  std::string annotator_id;
  std::string scenario_id;
  std::vector<ActionAnnotation> annotations;
};

using CategoryCensus = std::map<Category, std::size_t>;

class Corpus {
 public:
  Corpus() = default;
  // Validates every invariant; throws CorpusError on the first violation.
  Corpus(std::vector<Scenario> scenarios,
         std::vector<ActionAnnotation> gold_annotations,
         std::vector<AnnotatorRecord> annotator_records = {});

  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  const std::vector<ActionAnnotation>& gold_annotations() const {
    return gold_annotations_;
  }
  const std::vector<AnnotatorRecord>& annotator_records() const {
    return annotator_records_;
  }

  // nullptr when absent.
  const Scenario* find_scenario(std::string_view id) const;
  const Sentence* find_sentence(const SentenceRef& ref) const;
  // Throws CorpusError(kDanglingReference) when absent.
  const Sentence& sentence(const SentenceRef& ref) const;

  CategoryCensus census() const;

  // Indices into gold_annotations() of the given category, in file order.
  std::vector<std::size_t> annotation_indices(Category category) const;

 private:
  std::vector<Scenario> scenarios_;
  std::vector<ActionAnnotation> gold_annotations_;
  std::vector<AnnotatorRecord> annotator_records_;
  std::map<std::string, std::size_t, std::less<>> scenario_index_;
};

// Derives a lemma from a surface verb when the corpus omits one: lowercase,
// then strip a trailing "ies" (to "y"), "es" after a sibilant, or "s" from
// the first word of the phrase.
std::string fallback_lemma(std::string_view surface_verb);

Corpus parse_corpus(const nlohmann::json& document);
Corpus load_corpus(const std::string& path);
nlohmann::json corpus_to_json(const Corpus& corpus);
nlohmann::json annotation_to_json(const ActionAnnotation& annotation);

struct LintFinding {
  std::string code;  // "H1", "H5" or "overlap"
  std::size_t annotation_index = 0;
  std::string message;
};

// Machine-checkable annotation heuristics. Findings are warnings; they never
// make a corpus invalid.
std::vector<LintFinding> lint_corpus(const Corpus& corpus);

struct SplitItem {
  SentenceRef sentence;
  std::size_t annotation_index = 0;  // into Corpus::gold_annotations()
};

struct DatasetSplit {
  Category category = Category::kGoal;
  std::uint64_t seed = 0;
  std::vector<SplitItem> train;
  std::vector<SplitItem> validation;
  std::vector<SplitItem> test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

inline constexpr std::size_t kMinSplitItems = 5;

// test = validation = round-half-up(n / 5), train = the rest.
SplitSizes split_sizes(std::size_t n);

// Shuffles the category's gold annotations with Rng(derive_seed(seed,
// "split/<category>")) and cuts test, validation, then train off the front.
// Throws std::invalid_argument when fewer than kMinSplitItems exist.
DatasetSplit split_dataset(const Corpus& corpus, Category category,
                           std::uint64_t seed);

nlohmann::json split_to_json(const DatasetSplit& split);

// Chance-corrected agreement between two equal-length label sequences.
// Returns exactly 1.0 when the sequences agree everywhere.
double cohen_kappa(std::span<const std::string> labels_a,
                   std::span<const std::string> labels_b);

inline constexpr std::string_view kOutsideLabel = "O";

// One label per token of the scenario, sentences concatenated in order:
// "verb:<Category>", "arg:<Kind>" or "O". Verb labels win on overlap.
std::vector<std::string> annotation_to_token_labels(
    const AnnotatorRecord& record, const Scenario& scenario);

// Lowercased lemmas of every gold annotation.
std::set<std::string> build_verb_lexicon(const Corpus& corpus);

}  // namespace ropasum

#endif  // ROPASUM_CORPUS_H_
