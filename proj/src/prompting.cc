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

#include "ropasum/prompting.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ropasum/hashing.h"
#include "ropasum/random.h"
#include "ropasum/text.h"

namespace ropasum {

using nlohmann::json;

PromptTemplate default_prompt_template() {
  PromptTemplate t;
  t.persona =
      "### Instruction ###\n"
      "You are an expert requirements analyst who documents the processing "
      "activities of mobile apps for a Record of Processing Activities.";
  t.task_instruction =
      "Summarize the action whose verb is marked between \xE2\x9F\xA8tgr"
      "\xE2\x9F\xA9 and \xE2\x9F\xA8/tgr\xE2\x9F\xA9 in the input sentence. "
      "Write one sentence: the actor (User, App, or the named external "
      "entity), the action verb in third person singular, then the data "
      "types, UI components, purposes, and external entities of that action. "
      "Join several items of the same kind with \"and\".";
  t.constraint =
      "Constraint: the summary may only contain tokens that appear in the "
      "input sentence, apart from the actor and the conjugated verb.";
  t.example_header = "### Examples ###";
  t.input_label = "Input:";
  t.output_label = "Output:";
  return t;
}

void validate_template(const PromptTemplate& t) {
  auto check = [](const std::string& value, const char* name) {
    if (value.empty()) {
      throw std::invalid_argument(std::string("prompt template field '") +
                                  name + "' is empty");
    }
  };
  check(t.persona, "persona");
  check(t.task_instruction, "task_instruction");
  check(t.constraint, "constraint");
  check(t.example_header, "example_header");
  check(t.input_label, "input_label");
  check(t.output_label, "output_label");
}

PromptTemplate prompt_template_from_json(const json& value) {
  if (!value.is_object()) {
    throw std::invalid_argument("prompt template must be a JSON object");
  }
  auto field = [&](const char* key) {
    auto it = value.find(key);
    if (it == value.end() || !it->is_string()) {
      throw std::invalid_argument(std::string("prompt template field '") +
                                  key + "' missing or not a string");
    }
    return it->get<std::string>();
  };
  PromptTemplate t{field("persona"),        field("task_instruction"),
                   field("constraint"),     field("example_header"),
                   field("input_label"),    field("output_label")};
  validate_template(t);
  return t;
}

json prompt_template_to_json(const PromptTemplate& t) {
  return {{"persona", t.persona},
          {"task_instruction", t.task_instruction},
          {"constraint", t.constraint},
          {"example_header", t.example_header},
          {"input_label", t.input_label},
          {"output_label", t.output_label}};
}

PromptTemplate load_prompt_template(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open prompt template " + path);
  return prompt_template_from_json(json::parse(in));
}

std::string template_hash(const PromptTemplate& t) {
  return sha256_hex(prompt_template_to_json(t).dump());
}

bool has_single_trigger(std::string_view input) {
  std::size_t open = input.find(kTriggerOpen);
  if (open == std::string_view::npos) return false;
  std::size_t close = input.find(kTriggerClose, open);
  if (close == std::string_view::npos) return false;
  return input.find(kTriggerOpen, open + 1) == std::string_view::npos &&
         input.find(kTriggerClose, close + 1) == std::string_view::npos;
}

ExampleSet select_examples(std::span<const GoldItem> train, std::size_t k,
                           std::uint64_t seed) {
  if (k > train.size()) {
    throw std::invalid_argument("select_examples: k=" + std::to_string(k) +
                                " exceeds training pool of " +
                                std::to_string(train.size()));
  }
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "select_examples"));
  rng.shuffle(std::span<std::size_t>(order));

  ExampleSet set;
  set.source_seed = seed;
  for (std::size_t i = 0; i < k; ++i) {
    const GoldItem& item = train[order[i]];
    set.examples.push_back(Example{item.input, item.gold});
  }
  return set;
}

void validate_prompt_spec(const PromptSpec& spec) {
  validate_template(spec.tmpl);
  if (!has_single_trigger(spec.target_input)) {
    throw std::invalid_argument("target input lacks a single trigger");
  }
  for (const Example& e : spec.examples.examples) {
    if (!has_single_trigger(e.input)) {
      throw std::invalid_argument("example input lacks a single trigger: " +
                                  e.input);
    }
    if (e.input == spec.target_input) {
      throw std::invalid_argument("target input appears among the examples");
    }
  }
}

std::string build_prompt(const PromptSpec& spec) {
  const PromptTemplate& t = spec.tmpl;
  std::vector<std::string> sections = {t.persona, t.task_instruction,
                                       t.constraint};
  if (!spec.examples.empty()) sections.push_back(t.example_header);
  for (const Example& e : spec.examples.examples) {
    sections.push_back(t.input_label + " " + e.input + "\n" + t.output_label +
                       " " + e.output);
  }
  sections.push_back(t.input_label + " " + spec.target_input + "\n" +
                     t.output_label);
  return join_tokens(sections, "\n\n");
}

ExampleSet reorder(const ExampleSet& examples,
                   std::span<const std::size_t> order) {
  ExampleSet out;
  out.source_seed = examples.source_seed;
  for (std::size_t i : order) out.examples.push_back(examples.examples.at(i));
  return out;
}

std::uint64_t factorial(std::size_t k) {
  if (k > 20) throw std::overflow_error("factorial: k > 20 overflows");
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

std::vector<std::size_t> unrank_permutation(std::uint64_t rank,
                                            std::size_t k) {
  std::vector<std::size_t> pool(k);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = k; i > 0; --i) {
    std::uint64_t block = factorial(i - 1);
    std::size_t pick = static_cast<std::size_t>(rank / block);
    rank %= block;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

std::uint64_t rank_permutation(std::span<const std::size_t> order) {
  std::uint64_t rank = 0;
  const std::size_t k = order.size();
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (order[j] < order[i]) ++smaller;
    }
    rank += smaller * factorial(k - 1 - i);
  }
  return rank;
}

PermutationStream::PermutationStream(ExampleSet examples,
                                     std::optional<std::uint64_t> limit,
                                     std::uint64_t sample_seed)
    : examples_(std::move(examples)) {
  const std::size_t k = examples_.size();
  if (k == 0) {
    throw std::invalid_argument("enumerate_permutations: empty example set");
  }
  const std::uint64_t all = factorial(k);
  if (limit && *limit < all) {
    sampled_ = true;
    total_ = *limit;
    Rng rng(derive_seed(sample_seed, "permutations", k));
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = all - *limit; j < all; ++j) {
      std::uint64_t t = rng.uniform_index(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    sampled_ranks_.assign(chosen.begin(), chosen.end());
  } else {
    total_ = all;
    current_.resize(k);
    std::iota(current_.begin(), current_.end(), 0);
  }
}

std::optional<Ordering> PermutationStream::next() {
  if (emitted_ >= total_) return std::nullopt;
  Ordering out;
  if (sampled_) {
    out.rank = sampled_ranks_[emitted_];
    out.order = unrank_permutation(out.rank, examples_.size());
  } else {
    out.rank = emitted_;
    out.order = current_;
    std::next_permutation(current_.begin(), current_.end());
  }
  out.examples = reorder(examples_, out.order);
  ++emitted_;
  return out;
}

PermutationStream enumerate_permutations(const ExampleSet& examples,
                                         std::optional<std::uint64_t> limit,
                                         std::uint64_t sample_seed) {
  return PermutationStream(examples, limit, sample_seed);
}

std::uint64_t estimate_units(std::string_view text) {
  return (utf8_length(text) + 3) / 4;
}

CostEstimate estimate_sweep_cost(std::span<const PricedPrompt> prompts,
                                 std::uint64_t max_output_units,
                                 double price_per_1k_units) {
  if (price_per_1k_units < 0.0) {
    throw std::invalid_argument("estimate_sweep_cost: negative rate");
  }
  CostEstimate estimate;
  for (const PricedPrompt& p : prompts) {
    std::uint64_t units = estimate_units(p.prompt) + max_output_units;
    estimate.units_by_dataset[p.dataset] += units;
    estimate.total_units += units;
  }
  for (const auto& [dataset, units] : estimate.units_by_dataset) {
    estimate.cost_by_dataset[dataset] =
        static_cast<double>(units) * price_per_1k_units / 1000.0;
  }
  estimate.total_cost =
      static_cast<double>(estimate.total_units) * price_per_1k_units / 1000.0;
  return estimate;
}

}  // namespace ropasum
