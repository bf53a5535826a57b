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

#include "ropasum/gold.h"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "ropasum/text.h"

namespace ropasum {
namespace {

constexpr std::array kGoalSlots = {ArgumentKind::kDataType,
                                   ArgumentKind::kPurpose,
                                   ArgumentKind::kExternalEntity};
constexpr std::array kStepSlots = {ArgumentKind::kUiComponent,
                                   ArgumentKind::kPurpose,
                                   ArgumentKind::kExternalEntity};
constexpr std::array kDpSlots = {
    ArgumentKind::kDataType, ArgumentKind::kUiComponent,
    ArgumentKind::kPurpose, ArgumentKind::kExternalEntity};

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string conjugate_word(const std::string& word) {
  static const std::map<std::string, std::string, std::less<>> kIrregular = {
      {"have", "has"}, {"do", "does"}, {"go", "goes"}, {"be", "is"}};
  if (auto it = kIrregular.find(word); it != kIrregular.end()) {
    return it->second;
  }
  if (word.ends_with("s") || word.ends_with("x") || word.ends_with("z") ||
      word.ends_with("ch") || word.ends_with("sh")) {
    return word + "es";
  }
  if (word.size() >= 2 && word.back() == 'y' &&
      !is_vowel(word[word.size() - 2])) {
    return word.substr(0, word.size() - 1) + "ies";
  }
  return word + "s";
}

// Finds `needle` in `haystack`, preferring an occurrence with no claimed
// token. Returns the start position or npos.
std::size_t find_sequence(const std::vector<std::string>& haystack,
                          const std::vector<std::string>& needle,
                          const std::vector<bool>& claimed) {
  if (needle.empty() || needle.size() > haystack.size()) {
    return std::string::npos;
  }
  std::size_t fallback = std::string::npos;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (!std::equal(needle.begin(), needle.end(), haystack.begin() + i)) {
      continue;
    }
    bool free = std::none_of(claimed.begin() + i,
                             claimed.begin() + i + needle.size(),
                             [](bool c) { return c; });
    if (free) return i;
    if (fallback == std::string::npos) fallback = i;
  }
  return fallback;
}

std::vector<std::size_t> claim(std::size_t start, std::size_t length,
                               std::vector<bool>& claimed) {
  std::vector<std::size_t> positions;
  for (std::size_t i = start; i < start + length; ++i) {
    claimed[i] = true;
    positions.push_back(i);
  }
  return positions;
}

}  // namespace

std::span<const ArgumentKind> template_slots(Category category) {
  switch (category) {
    case Category::kGoal:
      return kGoalSlots;
    case Category::kStep:
      return kStepSlots;
    case Category::kDp:
      return kDpSlots;
  }
  return {};
}

bool slot_allowed(Category category, ArgumentKind kind) {
  auto slots = template_slots(category);
  return std::find(slots.begin(), slots.end(), kind) != slots.end();
}

std::string actor_surface(Actor actor, std::string_view actor_name) {
  switch (actor) {
    case Actor::kUser:
      return "User";
    case Actor::kApp:
      return "App";
    case Actor::kExternal:
      return std::string(actor_name);
  }
  return {};
}

std::string conjugate_third_person(std::string_view lemma) {
  if (lemma.empty()) {
    throw std::invalid_argument("conjugate_third_person: empty lemma");
  }
  std::string text(lemma);
  std::size_t space = text.find(' ');
  if (space == std::string::npos) return conjugate_word(text);
  return conjugate_word(text.substr(0, space)) + text.substr(space);
}

std::string mark_trigger(const Sentence& sentence, const TokenRange& range) {
  if (!range.valid_for(sentence.tokens.size())) {
    throw std::out_of_range("mark_trigger: range outside sentence");
  }
  std::string out;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    if (i == range.start) out.append(kTriggerOpen);
    out += sentence.tokens[i].text;
    if (i == range.end) out.append(kTriggerClose);
  }
  return out;
}

SummaryTemplate build_template(const ActionAnnotation& annotation,
                               const Corpus& corpus,
                               std::vector<std::string>* warnings) {
  const Sentence& sentence = corpus.sentence(annotation.sentence);
  SummaryTemplate summary;
  summary.category = annotation.category;
  summary.actor_surface =
      actor_surface(annotation.actor, annotation.actor_name);
  summary.verb_lemma = to_lower(annotation.verb_lemma);
  summary.verb_3sg = conjugate_third_person(summary.verb_lemma);

  std::vector<ArgumentSpan> arguments = annotation.arguments;
  std::stable_sort(arguments.begin(), arguments.end(),
                   [](const ArgumentSpan& a, const ArgumentSpan& b) {
                     return a.range < b.range;
                   });
  for (const ArgumentSpan& arg : arguments) {
    std::string text = sentence.surface(arg.range);
    if (!slot_allowed(annotation.category, arg.kind)) {
      if (warnings != nullptr) {
        warnings->push_back(std::string(to_string(arg.kind)) + " argument '" +
                            text + "' is not a slot of " +
                            std::string(to_string(annotation.category)) +
                            " templates; dropped");
      }
      continue;
    }
    summary.slots[arg.kind].push_back(std::move(text));
  }
  return summary;
}

std::string render_summary(const SummaryTemplate& summary) {
  std::vector<std::string> segments;
  if (!summary.actor_surface.empty()) segments.push_back(summary.actor_surface);
  if (!summary.verb_3sg.empty()) segments.push_back(summary.verb_3sg);
  for (ArgumentKind kind : template_slots(summary.category)) {
    auto it = summary.slots.find(kind);
    if (it == summary.slots.end() || it->second.empty()) continue;
    segments.push_back(join_tokens(it->second, " and "));
  }
  return join_tokens(segments);
}

bool SlotAlignment::all_matched() const {
  return actor_matched && verb_matched &&
         std::all_of(arguments.begin(), arguments.end(),
                     [](const ArgumentMatch& m) { return m.matched; });
}

SlotAlignment parse_summary(std::string_view text,
                            const SummaryTemplate& gold) {
  SlotAlignment out;
  out.tokens = normalize_text(text);
  std::vector<bool> claimed(out.tokens.size(), false);

  std::vector<std::string> actor = normalize_text(gold.actor_surface);
  if (std::size_t at = find_sequence(out.tokens, actor, claimed);
      at != std::string::npos) {
    out.actor_matched = true;
    claim(at, actor.size(), claimed);
  }

  for (const std::string& form : {gold.verb_3sg, gold.verb_lemma}) {
    std::vector<std::string> verb = normalize_text(form);
    if (std::size_t at = find_sequence(out.tokens, verb, claimed);
        at != std::string::npos) {
      out.verb_matched = true;
      claim(at, verb.size(), claimed);
      break;
    }
  }

  // Longer arguments first so short ones do not steal their tokens.
  struct Pending {
    ArgumentKind kind;
    std::string text;
    std::vector<std::string> tokens;
    std::size_t order;
  };
  std::vector<Pending> pending;
  for (ArgumentKind kind : template_slots(gold.category)) {
    auto it = gold.slots.find(kind);
    if (it == gold.slots.end()) continue;
    for (const std::string& arg : it->second) {
      pending.push_back({kind, arg, normalize_text(arg), pending.size()});
    }
  }
  out.arguments.resize(pending.size());
  std::vector<std::size_t> order(pending.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return pending[a].tokens.size() > pending[b].tokens.size();
  });
  for (std::size_t i : order) {
    const Pending& p = pending[i];
    ArgumentMatch& match = out.arguments[p.order];
    match.kind = p.kind;
    match.text = p.text;
    std::size_t at = find_sequence(out.tokens, p.tokens, claimed);
    if (at != std::string::npos) {
      match.matched = true;
      match.positions = claim(at, p.tokens.size(), claimed);
    }
  }

  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    if (claimed[i]) continue;
    const std::string& t = out.tokens[i];
    bool scaffold = t == "and" ||
                    std::find(actor.begin(), actor.end(), t) != actor.end();
    if (scaffold) continue;
    out.leftovers.push_back(t);
    out.leftover_positions.push_back(i);
  }
  return out;
}

GoldItem make_gold_item(const Corpus& corpus, std::size_t annotation_index) {
  const ActionAnnotation& a = corpus.gold_annotations().at(annotation_index);
  GoldItem item;
  item.sentence = a.sentence;
  item.annotation_index = annotation_index;
  item.category = a.category;
  item.input = mark_trigger(corpus.sentence(a.sentence), a.verb_range);
  item.summary = build_template(a, corpus);
  item.gold = render_summary(item.summary);
  return item;
}

std::vector<GoldItem> make_gold_items(const Corpus& corpus,
                                      std::span<const SplitItem> items) {
  std::vector<GoldItem> out;
  out.reserve(items.size());
  for (const SplitItem& item : items) {
    out.push_back(make_gold_item(corpus, item.annotation_index));
  }
  return out;
}

nlohmann::json gold_item_to_json(const GoldItem& item) {
  return {{"scenario_id", item.sentence.scenario_id},
          {"sentence_index", item.sentence.sentence_index},
          {"category", to_string(item.category)},
          {"input", item.input},
          {"gold", item.gold}};
}

}  // namespace ropasum
