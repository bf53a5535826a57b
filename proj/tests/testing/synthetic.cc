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

#include "testing/synthetic.h"

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ropasum/gold.h"
#include "ropasum/random.h"

namespace ropasum::testing {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 12> kVerbs = {
    "get", "track", "share", "save", "view", "update",
    "delete", "upload", "check", "find", "sync", "store"};
constexpr std::array<std::string_view, 8> kAdjectives = {
    "daily", "recent", "saved", "private", "weekly", "old", "new", "shared"};
constexpr std::array<std::string_view, 10> kNouns = {
    "photos", "contacts", "messages", "location", "address",
    "notes", "payments", "orders", "readings", "files"};
constexpr std::array<std::string_view, 6> kWidgets = {
    "settings button", "menu icon", "search bar",
    "photo tab", "help button", "home screen"};
constexpr std::array<std::string_view, 4> kPurposeVerbs = {"see", "keep",
                                                           "compare", "review"};
constexpr std::array<std::string_view, 4> kEntities = {
    "my friends", "the bank", "advertisers", "my doctor"};

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& list) {
  return list[rng.uniform_index(N)];
}

class SentenceBuilder {
 public:
  std::size_t add(std::string_view words) {
    std::size_t start = tokens_.size();
    std::size_t pos = 0;
    while (pos <= words.size()) {
      std::size_t space = words.find(' ', pos);
      if (space == std::string_view::npos) space = words.size();
      tokens_.emplace_back(words.substr(pos, space - pos));
      pos = space + 1;
    }
    return start;
  }
  std::size_t last() const { return tokens_.size() - 1; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
};

json range(std::size_t start, std::size_t end) {
  return json::array({start, end});
}

}  // namespace

json synthetic_corpus_json(const SyntheticCounts& counts, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "synthetic_corpus"));
  json scenarios = json::array();
  json gold = json::array();
  std::size_t serial = 0;
  auto emit = [&](Category category) {
    std::string id = "s" + std::to_string(serial);
    std::string marker = "app" + std::to_string(serial);
    ++serial;
    std::string verb(pick(rng, kVerbs));
    SentenceBuilder b;
    json annotation = {{"scenario_id", id},
                       {"sentence_index", 0},
                       {"verb_lemma", verb},
                       {"category", to_string(category)}};
    json args = json::array();
    switch (category) {
      case Category::kGoal: {
        b.add("I want to");
        std::size_t v = b.add(verb);
        annotation["verb_range"] = range(v, v);
        annotation["actor"] = "user";
        b.add("my");
        std::size_t d = b.add(std::string(pick(rng, kAdjectives)) + " " +
                              std::string(pick(rng, kNouns)));
        args.push_back({{"kind", "data_type"}, {"range", range(d, b.last())}});
        if (rng.bernoulli(0.5)) {
          std::size_t e = b.add("with " + std::string(pick(rng, kEntities)));
          args.push_back(
              {{"kind", "external_entity"}, {"range", range(e, b.last())}});
        }
        break;
      }
      case Category::kStep: {
        b.add("I");
        std::size_t v = b.add(verb);
        annotation["verb_range"] = range(v, v);
        annotation["actor"] = "user";
        b.add("the");
        std::size_t u = b.add(pick(rng, kWidgets));
        args.push_back({{"kind", "ui_component"}, {"range", range(u, b.last())}});
        std::size_t p = b.add("to " + std::string(pick(rng, kPurposeVerbs)) +
                              " my " + std::string(pick(rng, kNouns)));
        args.push_back({{"kind", "purpose"}, {"range", range(p, b.last())}});
        break;
      }
      case Category::kDp: {
        bool external = rng.bernoulli(0.3);
        b.add(external ? "The bank" : "The app");
        std::size_t v = b.add(conjugate_third_person(verb));
        annotation["verb_range"] = range(v, v);
        annotation["actor"] = external ? "external" : "app";
        if (external) annotation["actor_name"] = "bank";
        b.add("my");
        std::size_t d = b.add(std::string(pick(rng, kAdjectives)) + " " +
                              std::string(pick(rng, kNouns)));
        args.push_back({{"kind", "data_type"}, {"range", range(d, b.last())}});
        if (rng.bernoulli(0.5)) {
          std::size_t p = b.add("to " + std::string(pick(rng, kPurposeVerbs)) +
                                " my " + std::string(pick(rng, kNouns)));
          args.push_back({{"kind", "purpose"}, {"range", range(p, b.last())}});
        }
        break;
      }
    }
    b.add("in " + marker + " .");
    annotation["arguments"] = args;
    std::string raw;
    for (const std::string& t : b.tokens()) raw += (raw.empty() ? "" : " ") + t;
    scenarios.push_back(
        {{"id", id},
         {"raw_text", raw},
         {"sentences", json::array({{{"index", 0}, {"tokens", b.tokens()}}})}});
    gold.push_back(std::move(annotation));
  };
  for (std::size_t i = 0; i < counts.goal; ++i) emit(Category::kGoal);
  for (std::size_t i = 0; i < counts.step; ++i) emit(Category::kStep);
  for (std::size_t i = 0; i < counts.dp; ++i) emit(Category::kDp);
  return {{"scenarios", scenarios}, {"gold_annotations", gold}};
}

Corpus synthetic_corpus(const SyntheticCounts& counts, std::uint64_t seed) {
  return parse_corpus(synthetic_corpus_json(counts, seed));
}

}  // namespace ropasum::testing
