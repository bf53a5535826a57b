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

#ifndef ROPASUM_GOLD_H_
#define ROPASUM_GOLD_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ropasum/corpus.h"

namespace ropasum {

// Slot order of each category's controlled-language template.
std::span<const ArgumentKind> template_slots(Category category);
bool slot_allowed(Category category, ArgumentKind kind);

// Structured form of a ground-truth summary:
//   <actor> <verb-3sg> <slot> <slot> ...
// with multiple arguments in one slot joined by "and".
struct SummaryTemplate {
  Category category = Category::kGoal;
  std::string actor_surface;
  std::string verb_lemma;
  std::string verb_3sg;
  std::map<ArgumentKind, std::vector<std::string>> slots;
};

std::string actor_surface(Actor actor, std::string_view actor_name);

// Third-person singular of a lowercase lemma. Multi-word phrases conjugate
// their first word ("sign up" -> "signs up"). Throws std::invalid_argument
// on an empty lemma.
std::string conjugate_third_person(std::string_view lemma);

// Sentence surface with the trigger markers glued around the verb range:
// "I ⟨tgr⟩get⟨/tgr⟩ promotions". Throws std::out_of_range on a bad range.
std::string mark_trigger(const Sentence& sentence, const TokenRange& range);

// Builds the template for one annotation. Arguments keep sentence order.
// Arguments whose kind is not a slot of the category are dropped and
// reported through `warnings` when non-null.
SummaryTemplate build_template(const ActionAnnotation& annotation,
                               const Corpus& corpus,
                               std::vector<std::string>* warnings = nullptr);

std::string render_summary(const SummaryTemplate& summary);

struct ArgumentMatch {
  ArgumentKind kind = ArgumentKind::kDataType;
  std::string text;
  bool matched = false;
  // Normalized token positions in the parsed text (empty when unmatched).
  std::vector<std::size_t> positions;
};

struct SlotAlignment {
  std::vector<std::string> tokens;  // normalized text tokens
  bool actor_matched = false;
  bool verb_matched = false;
  std::vector<ArgumentMatch> arguments;
  std::vector<std::string> leftovers;
  std::vector<std::size_t> leftover_positions;

  bool all_matched() const;
  bool full_match() const { return all_matched() && leftovers.empty(); }
};

// Aligns free text against a gold template. Matching is on normalized
// tokens; the verb matches under its lemma or third-person form. Tokens that
// match nothing and are not scaffolding ("and", the actor) are leftovers.
SlotAlignment parse_summary(std::string_view text, const SummaryTemplate& gold);

// A gold annotation prepared for prompting: the marked input sentence and the
// rendered summary.
struct GoldItem {
  SentenceRef sentence;
  std::size_t annotation_index = 0;
  Category category = Category::kGoal;
  std::string input;
  std::string gold;
  SummaryTemplate summary;
};

GoldItem make_gold_item(const Corpus& corpus, std::size_t annotation_index);
std::vector<GoldItem> make_gold_items(const Corpus& corpus,
                                      std::span<const SplitItem> items);

// JSON line written by `render-gold`.
nlohmann::json gold_item_to_json(const GoldItem& item);

}  // namespace ropasum

#endif  // ROPASUM_GOLD_H_
