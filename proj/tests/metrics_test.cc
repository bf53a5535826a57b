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

#include "ropasum/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "ropasum/llm_client.h"
#include "ropasum/random.h"
#include "ropasum/text.h"
#include "testing/local_server.h"

namespace ropasum {
namespace {

using nlohmann::json;
using Seq = std::vector<std::string>;

Seq random_seq(Rng& rng, std::size_t max_len) {
  static const Seq kVocab{"a", "b", "c", "d"};
  Seq s(rng.uniform_index(max_len + 1));
  for (std::string& t : s) t = kVocab[rng.uniform_index(kVocab.size())];
  return s;
}

// Plain recursion over both suffixes.
std::size_t lcs_oracle(const Seq& a, const Seq& b, std::size_t i = 0,
                       std::size_t j = 0) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + lcs_oracle(a, b, i + 1, j + 1);
  return std::max(lcs_oracle(a, b, i + 1, j), lcs_oracle(a, b, i, j + 1));
}

std::map<std::pair<std::string, std::string>, int> skip_bigrams(const Seq& s) {
  std::map<std::pair<std::string, std::string>, int> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) ++out[{s[i], s[j]}];
  }
  return out;
}

double f1_oracle(double overlap, double cand, double ref) {
  double p = cand > 0 ? overlap / cand : 0;
  double r = ref > 0 ? overlap / ref : 0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0;
}

TEST(RougeTest, FixturesFromHand) {
  Seq ref{"user", "orders", "food"};
  Seq cand{"user", "food"};
  EXPECT_NEAR(rouge_n(ref, cand, 1).f1, 0.8, 1e-9);
  EXPECT_NEAR(rouge_n(ref, cand, 1).precision, 1.0, 1e-12);
  EXPECT_EQ(rouge_n(ref, cand, 2).f1, 0.0);
  MetricReport r = evaluate_pair("User gets promotions",
                                 "User gets regular promotions offered",
                                 *std::make_unique<HashEmbeddingProvider>());
  EXPECT_NEAR(r.rougeL.f1, 0.75, 1e-9);
  EXPECT_NEAR(r.rougeL.precision, 0.6, 1e-12);
  EXPECT_NEAR(r.rougeL.recall, 1.0, 1e-12);
}

TEST(RougeTest, EmptyInputsScoreZero) {
  Seq empty;
  Seq one{"a"};
  EXPECT_EQ(rouge_l(empty, one).f1, 0.0);
  EXPECT_EQ(rouge_n(one, empty, 1).f1, 0.0);
  EXPECT_EQ(rouge_s(one, one).f1, 0.0);
  EXPECT_THROW(rouge_n(one, one, 0), std::invalid_argument);
}

TEST(RougeTest, LcsMatchesRecursiveOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    Seq a = random_seq(rng, 7);
    Seq b = random_seq(rng, 7);
    std::size_t expected = lcs_oracle(a, b);
    ASSERT_EQ(lcs_length(a, b), expected);
    ASSERT_EQ(rouge_l(a, b).f1,
              f1_oracle(expected, b.size(), a.size()));
  }
}

TEST(RougeTest, SkipBigramsMatchEnumeration) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    Seq ref = random_seq(rng, 7);
    Seq cand = random_seq(rng, 7);
    auto rb = skip_bigrams(ref);
    auto cb = skip_bigrams(cand);
    double overlap = 0;
    for (const auto& [gram, n] : cb) {
      auto it = rb.find(gram);
      if (it != rb.end()) overlap += std::min(n, it->second);
    }
    double rn = ref.size() * (ref.size() - (ref.empty() ? 0 : 1)) / 2.0;
    double cn = cand.size() * (cand.size() - (cand.empty() ? 0 : 1)) / 2.0;
    ASSERT_EQ(rouge_s(ref, cand).f1, f1_oracle(overlap, cn, rn));
    ScoreTriple s0 = rouge_s(ref, cand, 0);
    ScoreTriple r2 = rouge_n(ref, cand, 2);
    ASSERT_EQ(s0.precision, r2.precision);
    ASSERT_EQ(s0.recall, r2.recall);
    ASSERT_EQ(s0.f1, r2.f1);
  }
}

TEST(MeteorTest, Stemmer) {
  EXPECT_EQ(meteor_stem("promotions"), "promotion");
  EXPECT_EQ(meteor_stem("carries"), "carry");
  EXPECT_EQ(meteor_stem("pushes"), "push");
  EXPECT_EQ(meteor_stem("tracking"), "track");
  EXPECT_EQ(meteor_stem("shared"), "shar");
  EXPECT_EQ(meteor_stem("access"), "access");
  EXPECT_EQ(meteor_stem("gets"), "get");
  EXPECT_EQ(meteor_stem("is"), "is");
}

TEST(MeteorTest, PerfectMatchPaysOnlyTheChunkPenalty) {
  Seq s{"user", "gets", "promotions"};
  ScoreTriple m = meteor(s, s);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_NEAR(m.f1, 1.0 - 0.5 / 27.0, 1e-12);
  EXPECT_EQ(meteor(Seq{}, s).f1, 0.0);
  EXPECT_EQ(meteor(s, Seq{"x"}).f1, 0.0);
}

TEST(MeteorTest, ScrambledOrderFragments) {
  Seq ref{"the", "cat", "sat", "on", "the", "mat"};
  Seq cand{"on", "the", "mat", "sat", "the", "cat"};
  MeteorAlignment a = meteor_align(ref, cand);
  EXPECT_EQ(a.exact_matches, 6u);
  EXPECT_EQ(a.chunks, 3u);
  EXPECT_NEAR(meteor(ref, cand).f1, 1.0 - 0.5 * std::pow(0.5, 3), 1e-12);
}

TEST(MeteorTest, StemMatchesCountAfterExactOnes) {
  Seq ref{"user", "shares", "photos"};
  Seq cand{"user", "share", "photo"};
  MeteorAlignment a = meteor_align(ref, cand);
  EXPECT_EQ(a.exact_matches, 1u);
  EXPECT_EQ(a.stem_matches, 2u);
  EXPECT_EQ(a.chunks, 1u);
}

// Every injective partial alignment, ranked by the same four-part key.
struct OracleKey {
  long exact = -1, neg_exact_chunks = 0, stem = 0, neg_chunks = 0;
  auto operator<=>(const OracleKey&) const = default;
};

long count_chunks(std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  long chunks = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0 || pairs[i].first != pairs[i - 1].first + 1 ||
        pairs[i].second != pairs[i - 1].second + 1) {
      ++chunks;
    }
  }
  return chunks;
}

void enumerate(const Seq& ref, const Seq& cand, std::size_t i,
               std::vector<bool>& used,
               std::vector<std::pair<std::size_t, std::size_t>>& exact,
               std::vector<std::pair<std::size_t, std::size_t>>& all,
               OracleKey& best) {
  if (i == cand.size()) {
    OracleKey key{static_cast<long>(exact.size()), -count_chunks(exact),
                  static_cast<long>(all.size() - exact.size()),
                  -count_chunks(all)};
    best = std::max(best, key);
    return;
  }
  enumerate(ref, cand, i + 1, used, exact, all, best);
  for (std::size_t j = 0; j < ref.size(); ++j) {
    if (used[j]) continue;
    bool is_exact = ref[j] == cand[i];
    if (!is_exact && meteor_stem(ref[j]) != meteor_stem(cand[i])) continue;
    used[j] = true;
    all.push_back({i, j});
    if (is_exact) exact.push_back({i, j});
    enumerate(ref, cand, i + 1, used, exact, all, best);
    if (is_exact) exact.pop_back();
    all.pop_back();
    used[j] = false;
  }
}

TEST(MeteorTest, MatchesBruteForceOracle) {
  static const Seq kVocab{"a", "as", "b", "bs", "c", "the"};
  Rng rng(3);
  for (int trial = 0; trial < 400; ++trial) {
    Seq ref(1 + rng.uniform_index(6));
    Seq cand(1 + rng.uniform_index(6));
    for (auto& t : ref) t = kVocab[rng.uniform_index(kVocab.size())];
    for (auto& t : cand) t = kVocab[rng.uniform_index(kVocab.size())];
    std::vector<bool> used(ref.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> exact;
    std::vector<std::pair<std::size_t, std::size_t>> all;
    OracleKey best;
    enumerate(ref, cand, 0, used, exact, all, best);
    MeteorAlignment a = meteor_align(ref, cand);
    ASSERT_TRUE(a.exhaustive);
    ASSERT_EQ(static_cast<long>(a.exact_matches), best.exact);
    ASSERT_EQ(static_cast<long>(a.stem_matches), best.stem);
    ASSERT_EQ(-static_cast<long>(a.chunks), best.neg_chunks);

    double m = static_cast<double>(best.exact + best.stem);
    double expected = 0.0;
    if (m > 0) {
      double p = m / cand.size();
      double r = m / ref.size();
      double fmean = 10 * p * r / (r + 9 * p);
      expected = fmean * (1 - 0.5 * std::pow(-best.neg_chunks / m, 3));
    }
    ASSERT_NEAR(meteor(ref, cand).f1, expected, 1e-12);
  }
}

// Returns fixed vectors per token.
class TableEmbedder : public EmbeddingProvider {
 public:
  std::string id() const override { return "table"; }
  std::vector<std::vector<double>> embed(Tokens tokens) override {
    const double h = std::sqrt(0.5);
    std::map<std::string, std::vector<double>> table{
        {"a", {1, 0, 0}}, {"b", {0, 1, 0}}, {"c", {h, h, 0}},
        {"na", {-1, 0, 0}}};
    std::vector<std::vector<double>> out;
    for (const auto& t : tokens) out.push_back(table.at(t));
    return out;
  }
};

TEST(BertScoreTest, HandComputedGreedyMatching) {
  TableEmbedder e;
  const double h = std::sqrt(0.5);
  ScoreTriple s = bert_score(Seq{"a", "b"}, Seq{"a", "c"}, e);
  EXPECT_NEAR(s.recall, (1.0 + h) / 2, 1e-12);
  EXPECT_NEAR(s.precision, (1.0 + h) / 2, 1e-12);
  ScoreTriple t = bert_score(Seq{"a", "b"}, Seq{"a"}, e);
  EXPECT_NEAR(t.precision, 1.0, 1e-12);
  EXPECT_NEAR(t.recall, 0.5, 1e-12);
  EXPECT_NEAR(t.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(bert_score(Seq{"a"}, Seq{"na"}, e).f1, 0.0);
  EXPECT_EQ(bert_score(Seq{}, Seq{"a"}, e).f1, 0.0);
}

TEST(BertScoreTest, IdenticalTokensScoreExactlyOne) {
  HashEmbeddingProvider e(64, 7);
  Seq s{"user", "gets", "promotions"};
  ScoreTriple r = bert_score(s, s, e);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_EQ(e.id(), "hash:64:7");
  EXPECT_EQ(e.embed(s), e.embed(s));
}

TEST(BertScoreTest, RemoteEmbeddingsOverHttp) {
  testing::LocalServer server;
  server.server().Post(
      "/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        json data = json::array();
        for (const json& token : body["input"]) {
          double x = token == "user" ? 1.0 : 0.0;
          data.push_back({{"embedding", {x, 1.0 - x}}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
      });
  server.start();
  HttpEmbeddingProvider e(server.url("/v1/embeddings"), "emb", "");
  EXPECT_EQ(e.id(), "remote:emb");
  auto v = e.embed(Seq{"user", "gets"});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(bert_score(Seq{"user"}, Seq{"user"}, e).f1, 1.0);
}

TEST(ReportTest, JsonRoundTripAndLookup) {
  HashEmbeddingProvider e;
  MetricReport r = evaluate_pair("User gets promotions", "User gets offers", e);
  MetricReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(report_to_json(back).dump(), report_to_json(r).dump());
  EXPECT_EQ(&r.get("meteor"), &r.meteor);
  EXPECT_THROW(r.get("bleu"), std::invalid_argument);
  for (std::string_view name : kMetricNames) {
    EXPECT_GE(r.get(name).f1, 0.0);
    EXPECT_LE(r.get(name).f1, 1.0);
  }
}

}  // namespace
}  // namespace ropasum
