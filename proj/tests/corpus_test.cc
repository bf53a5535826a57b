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

#include "ropasum/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "ropasum/random.h"
#include "testing/synthetic.h"

namespace ropasum {
namespace {

using nlohmann::json;

json promotions_corpus() {
  return json::parse(R"({
    "scenarios": [{
      "id": "shop",
      "app_name": "DealFinder",
      "raw_text": "I want to get regular promotions offered to me. I tap the deals tab.",
      "sentences": [
        {"index": 0, "tokens": ["I","want","to","get","regular","promotions","offered","to","me","."]},
        {"index": 1, "tokens": ["I","tap","the","deals","tab","."]}
      ]
    }],
    "gold_annotations": [
      {"scenario_id": "shop", "sentence_index": 0, "verb_range": [3,3],
       "verb_lemma": "get", "category": "goal", "actor": "user",
       "arguments": [{"kind": "data_type", "range": [5,5]}]},
      {"scenario_id": "shop", "sentence_index": 1, "verb_range": [1,1],
       "category": "step", "actor": "user",
       "arguments": [{"kind": "ui_component", "range": [3,4]}]}
    ]
  })");
}

CorpusError::Kind error_kind(const json& doc) {
  try {
    parse_corpus(doc);
  } catch (const CorpusError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "corpus unexpectedly valid";
  return CorpusError::Kind::kIo;
}

TEST(CorpusTest, ParsesValidCorpus) {
  Corpus corpus = parse_corpus(promotions_corpus());
  ASSERT_EQ(corpus.scenarios().size(), 1u);
  EXPECT_EQ(corpus.scenarios()[0].app_name, "DealFinder");
  ASSERT_EQ(corpus.gold_annotations().size(), 2u);
  EXPECT_EQ(corpus.gold_annotations()[1].verb_lemma, "tap");
  const Sentence& s = corpus.sentence({"shop", 0});
  EXPECT_EQ(s.surface({4, 6}), "regular promotions offered");
  EXPECT_EQ(corpus.census().at(Category::kGoal), 1u);
  EXPECT_EQ(corpus.census().at(Category::kStep), 1u);
  EXPECT_EQ(corpus.annotation_indices(Category::kStep),
            std::vector<std::size_t>{1});
}

TEST(CorpusTest, RoundTripsThroughJson) {
  Corpus corpus = parse_corpus(promotions_corpus());
  Corpus again = parse_corpus(corpus_to_json(corpus));
  EXPECT_EQ(corpus_to_json(again).dump(), corpus_to_json(corpus).dump());
}

TEST(CorpusTest, RejectsDanglingScenario) {
  json doc = promotions_corpus();
  doc["gold_annotations"][0]["scenario_id"] = "nowhere";
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kDanglingReference);
}

TEST(CorpusTest, RejectsDanglingSentence) {
  json doc = promotions_corpus();
  doc["gold_annotations"][0]["sentence_index"] = 7;
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kDanglingReference);
}

TEST(CorpusTest, RejectsOutOfRangeSpans) {
  json doc = promotions_corpus();
  doc["gold_annotations"][0]["verb_range"] = json::array({3, 10});
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kOutOfRange);
  doc = promotions_corpus();
  doc["gold_annotations"][0]["arguments"][0]["range"] = json::array({6, 5});
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kOutOfRange);
}

TEST(CorpusTest, RejectsSchemaViolations) {
  json doc = promotions_corpus();
  doc["gold_annotations"][0]["category"] = "wish";
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kSchema);
  doc = promotions_corpus();
  doc["gold_annotations"][0]["actor"] = "external";
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kSchema);
  doc = promotions_corpus();
  doc["scenarios"][0]["raw_text"] = "something else entirely";
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kSchema);
  doc = promotions_corpus();
  doc["scenarios"][0]["sentences"][1]["index"] = 3;
  EXPECT_EQ(error_kind(doc), CorpusError::Kind::kSchema);
  EXPECT_EQ(error_kind(json::array()), CorpusError::Kind::kSchema);
}

TEST(CorpusTest, ErrorCarriesJsonPointer) {
  json doc = promotions_corpus();
  doc["gold_annotations"][1]["verb_range"] = json::array({1, 9});
  try {
    parse_corpus(doc);
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_EQ(e.pointer().rfind("/gold_annotations/1", 0), 0u) << e.pointer();
  }
}

TEST(CorpusTest, MissingFileIsIoError) {
  try {
    load_corpus("/nonexistent/corpus.json");
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_EQ(e.kind(), CorpusError::Kind::kIo);
  }
}

TEST(CorpusTest, ExampleCorpusLoads) {
  Corpus corpus = load_corpus(std::string(ROPASUM_DATA_DIR) +
                              "/example_corpus.json");
  EXPECT_GE(corpus.annotation_indices(Category::kDp).size(), kMinSplitItems);
  EXPECT_TRUE(lint_corpus(corpus).empty());
}

TEST(CorpusTest, FallbackLemma) {
  EXPECT_EQ(fallback_lemma("Gets"), "get");
  EXPECT_EQ(fallback_lemma("carries"), "carry");
  EXPECT_EQ(fallback_lemma("pushes"), "push");
  EXPECT_EQ(fallback_lemma("tap"), "tap");
  EXPECT_EQ(fallback_lemma("signs up"), "sign up");
}

TEST(LintTest, FlagsHeuristicViolations) {
  json doc = promotions_corpus();
  // A step with a data type and no UI component trips H1 twice.
  doc["gold_annotations"][1]["arguments"] =
      json::parse(R"([{"kind": "data_type", "range": [3,4]}])");
  // A conjunction inside an argument trips H5.
  doc["scenarios"][0]["sentences"][0]["tokens"][6] = "and";
  doc["scenarios"][0]["raw_text"] =
      "I want to get regular promotions and to me. I tap the deals tab.";
  doc["gold_annotations"][0]["arguments"][0]["range"] = json::array({4, 8});
  std::multiset<std::string> codes;
  for (const LintFinding& f : lint_corpus(parse_corpus(doc))) {
    codes.insert(f.code);
  }
  EXPECT_EQ(codes.count("H1"), 2u);
  EXPECT_EQ(codes.count("H5"), 1u);
}

TEST(LintTest, FlagsArgumentOverlappingVerb) {
  json doc = promotions_corpus();
  doc["gold_annotations"][0]["arguments"][0]["range"] = json::array({3, 5});
  auto findings = lint_corpus(parse_corpus(doc));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].code, "overlap");
}

TEST(SplitTest, SizesFollowTheFifthRule) {
  struct Case {
    std::size_t n, train, validation, test;
  };
  for (Case c : {Case{64, 38, 13, 13}, Case{83, 49, 17, 17},
                 Case{253, 151, 51, 51}, Case{5, 3, 1, 1}, Case{20, 12, 4, 4}}) {
    SplitSizes s = split_sizes(c.n);
    EXPECT_EQ(s.train, c.train) << c.n;
    EXPECT_EQ(s.validation, c.validation) << c.n;
    EXPECT_EQ(s.test, c.test) << c.n;
  }
}

TEST(SplitTest, PartitionsAndIsDeterministic) {
  Corpus corpus = testing::synthetic_corpus({64, 83, 253}, 1);
  std::size_t total_test = 0;
  for (Category category : kAllCategories) {
    DatasetSplit a = split_dataset(corpus, category, 42);
    DatasetSplit b = split_dataset(corpus, category, 42);
    DatasetSplit c = split_dataset(corpus, category, 43);
    EXPECT_EQ(split_to_json(a).dump(), split_to_json(b).dump());
    EXPECT_NE(split_to_json(a).dump(), split_to_json(c).dump());
    std::vector<std::size_t> seen;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
      for (const SplitItem& item : *part) {
        seen.push_back(item.annotation_index);
        EXPECT_EQ(corpus.gold_annotations()[item.annotation_index].category,
                  category);
      }
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, corpus.annotation_indices(category));
    total_test += a.test.size();
  }
  EXPECT_EQ(total_test, 81u);
}

TEST(SplitTest, RejectsTinyCategories) {
  Corpus corpus = testing::synthetic_corpus({4, 5, 0}, 1);
  EXPECT_THROW(split_dataset(corpus, Category::kGoal, 0),
               std::invalid_argument);
  EXPECT_NO_THROW(split_dataset(corpus, Category::kStep, 0));
}

// Straight from the definition: (po - pe) / (1 - pe) over label counts.
double kappa_oracle(const std::vector<std::string>& a,
                    const std::vector<std::string>& b) {
  std::map<std::string, double> ca;
  std::map<std::string, double> cb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    agree += a[i] == b[i];
  }
  double n = static_cast<double>(a.size());
  double pe = 0;
  for (const auto& [label, count] : ca) pe += (count / n) * (cb[label] / n);
  double po = agree / n;
  if (pe == 1.0) return 1.0;
  return (po - pe) / (1 - pe);
}

TEST(KappaTest, Fixtures) {
  using L = std::vector<std::string>;
  L a{"x", "y", "x", "z"};
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
  EXPECT_NEAR(cohen_kappa(L{"x", "x", "y", "y"}, L{"x", "y", "x", "y"}), 0.0,
              1e-12);
  EXPECT_NEAR(cohen_kappa(L{"x", "x", "y", "y"}, L{"x", "x", "y", "x"}), 0.5,
              1e-12);
  EXPECT_EQ(cohen_kappa(L{"x", "x"}, L{"x", "x"}), 1.0);
  EXPECT_THROW(cohen_kappa(L{"x"}, L{"x", "y"}), std::invalid_argument);
  EXPECT_THROW(cohen_kappa(L{}, L{}), std::invalid_argument);
}

TEST(KappaTest, MatchesOracleAndIsSymmetric) {
  Rng rng(99);
  const std::vector<std::string> labels{"O", "verb:Goal", "arg:DataType",
                                        "arg:Purpose"};
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 2 + rng.uniform_index(30);
    std::vector<std::string> a;
    std::vector<std::string> b;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(labels[rng.uniform_index(labels.size())]);
      b.push_back(rng.bernoulli(0.6) ? a.back()
                                     : labels[rng.uniform_index(labels.size())]);
    }
    double k = cohen_kappa(a, b);
    EXPECT_EQ(k, cohen_kappa(b, a));
    EXPECT_NEAR(k, kappa_oracle(a, b), 1e-12);
    EXPECT_GE(k, -1.0);
    EXPECT_LE(k, 1.0);
  }
}

TEST(KappaTest, TokenLabelsFromAnnotatorRecords) {
  Corpus corpus = parse_corpus(promotions_corpus());
  AnnotatorRecord record{"a1", "shop", corpus.gold_annotations()};
  auto labels =
      annotation_to_token_labels(record, corpus.scenarios().front());
  ASSERT_EQ(labels.size(), 16u);
  EXPECT_EQ(labels[3], "verb:Goal");
  EXPECT_EQ(labels[5], "arg:DataType");
  EXPECT_EQ(labels[0], "O");
  EXPECT_EQ(labels[11], "verb:Step");
  EXPECT_EQ(labels[13], "arg:UIComponent");
  EXPECT_EQ(labels[14], "arg:UIComponent");
  AnnotatorRecord other = record;
  other.annotations[1].arguments.clear();
  auto other_labels =
      annotation_to_token_labels(other, corpus.scenarios().front());
  double k = cohen_kappa(labels, other_labels);
  EXPECT_GT(k, 0.0);
  EXPECT_LT(k, 1.0);
}

TEST(LexiconTest, CollectsLemmas) {
  Corpus corpus = parse_corpus(promotions_corpus());
  EXPECT_EQ(build_verb_lexicon(corpus), (std::set<std::string>{"get", "tap"}));
}

}  // namespace
}  // namespace ropasum
