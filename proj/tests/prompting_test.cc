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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ropasum/experiments.h"
#include "testing/synthetic.h"

namespace ropasum {
namespace {

PromptTemplate tiny_template() {
  return {"P", "T", "C", "H", "In:", "Out:"};
}

ExampleSet examples(std::size_t k) {
  ExampleSet set;
  for (std::size_t i = 0; i < k; ++i) {
    std::string n = std::to_string(i);
    set.examples.push_back({"a ⟨tgr⟩v" + n + "⟨/tgr⟩", "User v" + n + "s"});
  }
  return set;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = text.find(needle); p != std::string::npos;
       p = text.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

TEST(PromptTest, ZeroShotLayout) {
  PromptSpec spec{tiny_template(), {}, "x ⟨tgr⟩y⟨/tgr⟩"};
  EXPECT_EQ(build_prompt(spec), "P\n\nT\n\nC\n\nIn: x ⟨tgr⟩y⟨/tgr⟩\nOut:");
}

TEST(PromptTest, TwoShotLayout) {
  PromptSpec spec{tiny_template(), examples(2), "x ⟨tgr⟩y⟨/tgr⟩"};
  EXPECT_EQ(build_prompt(spec),
            "P\n\nT\n\nC\n\nH\n\n"
            "In: a ⟨tgr⟩v0⟨/tgr⟩\nOut: User v0s\n\n"
            "In: a ⟨tgr⟩v1⟨/tgr⟩\nOut: User v1s\n\n"
            "In: x ⟨tgr⟩y⟨/tgr⟩\nOut:");
}

TEST(PromptTest, BlockCountAndDistinctness) {
  std::set<std::string> prompts;
  for (std::size_t k = 0; k <= 10; ++k) {
    PromptSpec spec{default_prompt_template(), examples(k), "x ⟨tgr⟩y⟨/tgr⟩"};
    std::string p = build_prompt(spec);
    EXPECT_EQ(count(p, "\nOutput:"), k + 1);
    prompts.insert(p);
  }
  EXPECT_EQ(prompts.size(), 11u);
  PromptSpec a{tiny_template(), examples(3), "t"};
  PromptSpec b = a;
  std::vector<std::size_t> order{2, 0, 1};
  b.examples = reorder(a.examples, order);
  EXPECT_NE(build_prompt(a), build_prompt(b));
}

TEST(PromptTest, DefaultTemplateIsValidAndHashed) {
  PromptTemplate t = default_prompt_template();
  EXPECT_NO_THROW(validate_template(t));
  EXPECT_EQ(t.persona.rfind("### Instruction ###", 0), 0u);
  EXPECT_EQ(template_hash(t), template_hash(default_prompt_template()));
  PromptTemplate changed = t;
  changed.constraint += " ";
  EXPECT_NE(template_hash(t), template_hash(changed));
  EXPECT_EQ(prompt_template_from_json(prompt_template_to_json(t)).persona,
            t.persona);
  t.output_label.clear();
  EXPECT_THROW(validate_template(t), std::invalid_argument);
}

TEST(PromptTest, ShippedTemplateMatchesDefault) {
  PromptTemplate shipped =
      load_prompt_template(std::string(ROPASUM_DATA_DIR) +
                           "/prompt_template.json");
  EXPECT_EQ(template_hash(shipped), template_hash(default_prompt_template()));
}

TEST(PromptTest, SpecValidation) {
  PromptSpec spec{tiny_template(), examples(2), "x ⟨tgr⟩y⟨/tgr⟩"};
  EXPECT_NO_THROW(validate_prompt_spec(spec));
  spec.target_input = spec.examples.examples[0].input;
  EXPECT_THROW(validate_prompt_spec(spec), std::invalid_argument);
  spec.target_input = "no trigger";
  EXPECT_THROW(validate_prompt_spec(spec), std::invalid_argument);
  EXPECT_TRUE(has_single_trigger("a ⟨tgr⟩b⟨/tgr⟩ c"));
  EXPECT_FALSE(has_single_trigger("a ⟨tgr⟩b⟨/tgr⟩ ⟨tgr⟩c⟨/tgr⟩"));
}

TEST(SelectExamplesTest, DeterministicNestedPrefixes) {
  Corpus corpus = testing::synthetic_corpus({30, 0, 0}, 2);
  CategoryData data = prepare_category(corpus, Category::kGoal, 9);
  EXPECT_TRUE(select_examples(data.train, 0, 1).empty());
  ExampleSet ten = select_examples(data.train, 10, 1);
  EXPECT_EQ(ten.examples, select_examples(data.train, 10, 1).examples);
  ExampleSet three = select_examples(data.train, 3, 1);
  ExampleSet seven = select_examples(data.train, 7, 1);
  EXPECT_TRUE(std::equal(three.examples.begin(), three.examples.end(),
                         seven.examples.begin()));
  EXPECT_NE(ten.examples, select_examples(data.train, 10, 2).examples);
  EXPECT_THROW(select_examples(data.train, data.train.size() + 1, 1),
               std::invalid_argument);
}

TEST(PermutationTest, RankRoundTrip) {
  for (std::uint64_t r = 0; r < factorial(5); ++r) {
    auto order = unrank_permutation(r, 5);
    EXPECT_EQ(rank_permutation(order), r);
  }
  EXPECT_EQ(unrank_permutation(0, 3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(unrank_permutation(5, 3), (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_EQ(factorial(0), 1u);
  EXPECT_EQ(factorial(20), 2432902008176640000ULL);
  EXPECT_THROW(factorial(21), std::overflow_error);
}

TEST(PermutationTest, FullEnumeration) {
  for (std::size_t k : {1u, 3u, 6u}) {
    ExampleSet set = examples(k);
    PermutationStream stream = enumerate_permutations(set);
    std::set<std::vector<std::size_t>> seen;
    std::uint64_t expected_rank = 0;
    while (auto o = stream.next()) {
      EXPECT_EQ(o->rank, expected_rank++);
      EXPECT_EQ(rank_permutation(o->order), o->rank);
      EXPECT_EQ(o->examples.examples, reorder(set, o->order).examples);
      seen.insert(o->order);
    }
    EXPECT_EQ(seen.size(), factorial(k));
  }
  PermutationStream three = enumerate_permutations(examples(3));
  EXPECT_EQ(three.next()->order, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(PermutationTest, SampledModeIsDistinctAndStable) {
  ExampleSet set = examples(9);
  auto draw = [&](std::uint64_t seed) {
    std::vector<std::uint64_t> ranks;
    PermutationStream s = enumerate_permutations(set, 1000, seed);
    while (auto o = s.next()) ranks.push_back(o->rank);
    return ranks;
  };
  std::vector<std::uint64_t> a = draw(4);
  EXPECT_EQ(a.size(), 1000u);
  EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()).size(), 1000u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(a, draw(4));
  EXPECT_NE(a, draw(5));
  // A limit at or above k! enumerates everything.
  PermutationStream all = enumerate_permutations(examples(3), 100, 1);
  std::size_t n = 0;
  while (all.next()) ++n;
  EXPECT_EQ(n, 6u);
}

TEST(CostTest, Estimates) {
  EXPECT_EQ(estimate_units(""), 0u);
  EXPECT_EQ(estimate_units("abcde"), 2u);
  EXPECT_EQ(estimate_sweep_cost({}, 100, 0.5).total_cost, 0.0);
  std::vector<PricedPrompt> one{{"goal", std::string(400, 'x')}};
  CostEstimate e = estimate_sweep_cost(one, 100, 0.5);
  EXPECT_EQ(e.total_units, 200u);
  EXPECT_NEAR(e.total_cost, 0.1, 1e-12);
  std::vector<PricedPrompt> two{one[0], one[0]};
  EXPECT_NEAR(estimate_sweep_cost(two, 100, 0.5).total_cost, 0.2, 1e-12);
  EXPECT_THROW(estimate_sweep_cost(one, 100, -1.0), std::invalid_argument);
}

}  // namespace
}  // namespace ropasum
