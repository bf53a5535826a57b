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

#ifndef ROPASUM_PROMPTING_H_
#define ROPASUM_PROMPTING_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ropasum/gold.h"

namespace ropasum {

struct PromptTemplate {
  std::string persona;
  std::string task_instruction;
  std::string constraint;
  std::string example_header;
  std::string input_label;
  std::string output_label;
};

// Built-in wording; data/prompt_template.json carries the same text.
PromptTemplate default_prompt_template();

// Throws std::invalid_argument on empty fields.
void validate_template(const PromptTemplate& tmpl);
PromptTemplate prompt_template_from_json(const nlohmann::json& value);
nlohmann::json prompt_template_to_json(const PromptTemplate& tmpl);
PromptTemplate load_prompt_template(const std::string& path);
// SHA-256 over the canonical JSON serialization, so a file and the built-in
// default with equal text hash equally.
std::string template_hash(const PromptTemplate& tmpl);

struct Example {
  std::string input;
  std::string output;
  friend bool operator==(const Example&, const Example&) = default;
};

struct ExampleSet {
  std::vector<Example> examples;
  std::uint64_t source_seed = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// True when `input` holds exactly one ⟨tgr⟩...⟨/tgr⟩ region.
bool has_single_trigger(std::string_view input);

inline constexpr std::size_t kExamplePoolSize = 10;

// Shuffles the training pool once with the seed; the first
// kExamplePoolSize entries form the fixed example pool and the k-shot set is
// its first k entries, so every k-shot set is a prefix of the (k+1)-shot
// set. Throws std::invalid_argument when k exceeds the training pool.
ExampleSet select_examples(std::span<const GoldItem> train, std::size_t k,
                           std::uint64_t seed);

struct PromptSpec {
  PromptTemplate tmpl;
  ExampleSet examples;
  std::string target_input;
};

// Throws std::invalid_argument if an invariant of the spec is broken.
void validate_prompt_spec(const PromptSpec& spec);

// Persona, task, constraint, optional example header, one block per example,
// then an excerpt repeating the input label with the target and an empty
// output label. Sections are separated by a blank line.
std::string build_prompt(const PromptSpec& spec);

// Reorders an example set by `order`, a permutation of its indices.
ExampleSet reorder(const ExampleSet& examples,
                   std::span<const std::size_t> order);

std::uint64_t factorial(std::size_t k);
// Lexicographic rank <-> permutation of 0..k-1.
std::vector<std::size_t> unrank_permutation(std::uint64_t rank, std::size_t k);
std::uint64_t rank_permutation(std::span<const std::size_t> order);

struct Ordering {
  std::uint64_t rank = 0;  // lexicographic index among all k! orderings
  std::vector<std::size_t> order;
  ExampleSet examples;
};

// Lazy stream of example orderings.
//
// Without a limit it yields all k! orderings in lexicographic order starting
// from the identity. With a limit L < k! it draws L distinct ranks with
// Floyd's sampling under `sample_seed` and yields them in increasing rank
// order. A limit >= k! behaves like no limit.
class PermutationStream {
 public:
  PermutationStream(ExampleSet examples, std::optional<std::uint64_t> limit,
                    std::uint64_t sample_seed = 0);

  std::optional<Ordering> next();
  std::uint64_t total() const { return total_; }

 private:
  ExampleSet examples_;
  std::uint64_t total_ = 0;
  std::uint64_t emitted_ = 0;
  std::vector<std::size_t> current_;
  std::vector<std::uint64_t> sampled_ranks_;
  bool sampled_ = false;
};

PermutationStream enumerate_permutations(
    const ExampleSet& examples, std::optional<std::uint64_t> limit = {},
    std::uint64_t sample_seed = 0);

// Token accounting approximation: one unit per four characters, rounded up.
std::uint64_t estimate_units(std::string_view text);

struct CostEstimate {
  std::map<std::string, std::uint64_t> units_by_dataset;
  std::map<std::string, double> cost_by_dataset;
  std::uint64_t total_units = 0;
  double total_cost = 0.0;
};

struct PricedPrompt {
  std::string dataset;
  std::string prompt;
};

// Estimate only: units per prompt are estimate_units(prompt) plus the
// configured output allowance. Throws std::invalid_argument on a negative
// rate.
CostEstimate estimate_sweep_cost(std::span<const PricedPrompt> prompts,
                                 std::uint64_t max_output_units,
                                 double price_per_1k_units);

}  // namespace ropasum

#endif  // ROPASUM_PROMPTING_H_
