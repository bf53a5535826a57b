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

#include <algorithm>
#include <fstream>
#include <map>
#include <utility>

#include "ropasum/random.h"
#include "ropasum/text.h"

namespace ropasum {

using nlohmann::json;

std::string_view to_string(Category category) {
  switch (category) {
    case Category::kGoal:
      return "goal";
    case Category::kStep:
      return "step";
    case Category::kDp:
      return "dp";
  }
  return "?";
}

std::string_view to_string(Actor actor) {
  switch (actor) {
    case Actor::kUser:
      return "user";
    case Actor::kApp:
      return "app";
    case Actor::kExternal:
      return "external";
  }
  return "?";
}

std::string_view to_string(ArgumentKind kind) {
  switch (kind) {
    case ArgumentKind::kDataType:
      return "data_type";
    case ArgumentKind::kPurpose:
      return "purpose";
    case ArgumentKind::kExternalEntity:
      return "external_entity";
    case ArgumentKind::kUiComponent:
      return "ui_component";
  }
  return "?";
}

std::string_view display_name(Category category) {
  switch (category) {
    case Category::kGoal:
      return "Goal";
    case Category::kStep:
      return "Step";
    case Category::kDp:
      return "DP";
  }
  return "?";
}

std::string_view display_name(ArgumentKind kind) {
  switch (kind) {
    case ArgumentKind::kDataType:
      return "DataType";
    case ArgumentKind::kPurpose:
      return "Purpose";
    case ArgumentKind::kExternalEntity:
      return "ExternalEntity";
    case ArgumentKind::kUiComponent:
      return "UIComponent";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view text) {
  for (Category c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<Actor> parse_actor(std::string_view text) {
  for (Actor a : {Actor::kUser, Actor::kApp, Actor::kExternal}) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

std::optional<ArgumentKind> parse_argument_kind(std::string_view text) {
  for (ArgumentKind k :
       {ArgumentKind::kDataType, ArgumentKind::kPurpose,
        ArgumentKind::kExternalEntity, ArgumentKind::kUiComponent}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

CorpusError::CorpusError(Kind kind, std::string pointer,
                         const std::string& message)
    : std::runtime_error(pointer.empty() ? message
                                         : pointer + ": " + message),
      kind_(kind),
      pointer_(std::move(pointer)) {}

std::vector<std::string> Sentence::texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.text);
  return out;
}

std::string Sentence::surface() const { return join_tokens(texts()); }

std::string Sentence::surface(const TokenRange& range) const {
  std::string out;
  for (std::size_t i = range.start; i <= range.end && i < tokens.size(); ++i) {
    if (i > range.start) out.push_back(' ');
    out += tokens[i].text;
  }
  return out;
}

std::size_t Scenario::token_count() const {
  std::size_t n = 0;
  for (const Sentence& s : sentences) n += s.tokens.size();
  return n;
}

namespace {

std::string without_whitespace(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (!contains_whitespace(std::string_view(&c, 1))) out.push_back(c);
  }
  return out;
}

void validate_scenario(const Scenario& scenario, const std::string& pointer) {
  if (scenario.id.empty()) {
    throw CorpusError(CorpusError::Kind::kSchema, pointer + "/id",
                      "scenario id must be non-empty");
  }
  std::string joined;
  for (std::size_t s = 0; s < scenario.sentences.size(); ++s) {
    const Sentence& sentence = scenario.sentences[s];
    std::string sp = pointer + "/sentences/" + std::to_string(s);
    if (sentence.sentence_index != s) {
      throw CorpusError(CorpusError::Kind::kSchema, sp + "/index",
                        "sentence indices must be contiguous from 0");
    }
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
      const Token& token = sentence.tokens[t];
      std::string tp = sp + "/tokens/" + std::to_string(t);
      if (token.index != t) {
        throw CorpusError(CorpusError::Kind::kSchema, tp,
                          "token indices must be contiguous from 0");
      }
      if (token.text.empty() || contains_whitespace(token.text)) {
        throw CorpusError(CorpusError::Kind::kSchema, tp,
                          "token must be non-empty without whitespace");
      }
      joined += token.text;
    }
  }
  if (joined != without_whitespace(scenario.raw_text)) {
    throw CorpusError(CorpusError::Kind::kSchema, pointer + "/sentences",
                      "sentence tokens do not reproduce raw_text");
  }
}

void validate_annotation(const ActionAnnotation& a, const Sentence* sentence,
                         const std::string& pointer) {
  if (sentence == nullptr) {
    throw CorpusError(CorpusError::Kind::kDanglingReference, pointer,
                      "annotation references unknown sentence " +
                          a.sentence.scenario_id + "#" +
                          std::to_string(a.sentence.sentence_index));
  }
  const std::size_t n = sentence->tokens.size();
  if (!a.verb_range.valid_for(n)) {
    throw CorpusError(CorpusError::Kind::kOutOfRange, pointer + "/verb_range",
                      "verb_range outside sentence of " + std::to_string(n) +
                          " tokens");
  }
  for (std::size_t i = 0; i < a.arguments.size(); ++i) {
    if (!a.arguments[i].range.valid_for(n)) {
      throw CorpusError(CorpusError::Kind::kOutOfRange,
                        pointer + "/arguments/" + std::to_string(i) + "/range",
                        "argument range outside sentence of " +
                            std::to_string(n) + " tokens");
    }
  }
  if (a.actor == Actor::kExternal && a.actor_name.empty()) {
    throw CorpusError(CorpusError::Kind::kSchema, pointer + "/actor_name",
                      "actor_name is required for external actors");
  }
  if (a.verb_lemma.empty()) {
    throw CorpusError(CorpusError::Kind::kSchema, pointer + "/verb_lemma",
                      "verb_lemma must be non-empty");
  }
}

}  // namespace

Corpus::Corpus(std::vector<Scenario> scenarios,
               std::vector<ActionAnnotation> gold_annotations,
               std::vector<AnnotatorRecord> annotator_records)
    : scenarios_(std::move(scenarios)),
      gold_annotations_(std::move(gold_annotations)),
      annotator_records_(std::move(annotator_records)) {
  for (std::size_t i = 0; i < scenarios_.size(); ++i) {
    std::string pointer = "/scenarios/" + std::to_string(i);
    validate_scenario(scenarios_[i], pointer);
    if (!scenario_index_.emplace(scenarios_[i].id, i).second) {
      throw CorpusError(CorpusError::Kind::kSchema, pointer + "/id",
                        "duplicate scenario id " + scenarios_[i].id);
    }
  }
  for (std::size_t i = 0; i < gold_annotations_.size(); ++i) {
    const ActionAnnotation& a = gold_annotations_[i];
    validate_annotation(a, find_sentence(a.sentence),
                        "/gold_annotations/" + std::to_string(i));
  }
  for (std::size_t r = 0; r < annotator_records_.size(); ++r) {
    const AnnotatorRecord& record = annotator_records_[r];
    std::string pointer = "/annotator_records/" + std::to_string(r);
    if (find_scenario(record.scenario_id) == nullptr) {
      throw CorpusError(CorpusError::Kind::kDanglingReference,
                        pointer + "/scenario_id",
                        "unknown scenario " + record.scenario_id);
    }
    for (std::size_t i = 0; i < record.annotations.size(); ++i) {
      const ActionAnnotation& a = record.annotations[i];
      std::string ap = pointer + "/annotations/" + std::to_string(i);
      if (a.sentence.scenario_id != record.scenario_id) {
        throw CorpusError(CorpusError::Kind::kDanglingReference, ap,
                          "annotation outside the record's scenario");
      }
      validate_annotation(a, find_sentence(a.sentence), ap);
    }
  }
}

const Scenario* Corpus::find_scenario(std::string_view id) const {
  auto it = scenario_index_.find(id);
  return it == scenario_index_.end() ? nullptr : &scenarios_[it->second];
}

const Sentence* Corpus::find_sentence(const SentenceRef& ref) const {
  const Scenario* scenario = find_scenario(ref.scenario_id);
  if (scenario == nullptr || ref.sentence_index >= scenario->sentences.size()) {
    return nullptr;
  }
  return &scenario->sentences[ref.sentence_index];
}

const Sentence& Corpus::sentence(const SentenceRef& ref) const {
  const Sentence* s = find_sentence(ref);
  if (s == nullptr) {
    throw CorpusError(CorpusError::Kind::kDanglingReference, "",
                      "unknown sentence " + ref.scenario_id + "#" +
                          std::to_string(ref.sentence_index));
  }
  return *s;
}

CategoryCensus Corpus::census() const {
  CategoryCensus census;
  for (Category c : kAllCategories) census[c] = 0;
  for (const ActionAnnotation& a : gold_annotations_) ++census[a.category];
  return census;
}

std::vector<std::size_t> Corpus::annotation_indices(Category category) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < gold_annotations_.size(); ++i) {
    if (gold_annotations_[i].category == category) out.push_back(i);
  }
  return out;
}

std::string fallback_lemma(std::string_view surface_verb) {
  std::string lower = to_lower(surface_verb);
  std::size_t space = lower.find(' ');
  std::string head = lower.substr(0, space);
  std::string rest = space == std::string::npos ? "" : lower.substr(space);
  auto ends_with = [&](std::string_view suffix) {
    return head.size() > suffix.size() && head.ends_with(suffix);
  };
  if (ends_with("ies")) {
    head = head.substr(0, head.size() - 3) + "y";
  } else if (ends_with("sses") || ends_with("xes") || ends_with("zes") ||
             ends_with("ches") || ends_with("shes")) {
    head.resize(head.size() - 2);
  } else if (ends_with("s") && !ends_with("ss")) {
    head.pop_back();
  }
  return head + rest;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void schema_error(const std::string& pointer,
                               const std::string& message) {
  throw CorpusError(CorpusError::Kind::kSchema, pointer, message);
}

const json& require(const json& object, const char* key,
                    const std::string& pointer) {
  if (!object.is_object()) schema_error(pointer, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) {
    schema_error(pointer + "/" + key, "missing required field");
  }
  return *it;
}

std::string require_string(const json& object, const char* key,
                           const std::string& pointer) {
  const json& value = require(object, key, pointer);
  if (!value.is_string()) schema_error(pointer + "/" + key, "expected string");
  return value.get<std::string>();
}

std::size_t require_index(const json& value, const std::string& pointer) {
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
    schema_error(pointer, "expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

const json& require_array(const json& object, const char* key,
                          const std::string& pointer) {
  const json& value = require(object, key, pointer);
  if (!value.is_array()) schema_error(pointer + "/" + key, "expected array");
  return value;
}

TokenRange parse_range(const json& value, const std::string& pointer) {
  if (!value.is_array() || value.size() != 2) {
    schema_error(pointer, "expected [start, end]");
  }
  TokenRange range{require_index(value[0], pointer + "/0"),
                   require_index(value[1], pointer + "/1")};
  if (range.start > range.end) {
    throw CorpusError(CorpusError::Kind::kOutOfRange, pointer,
                      "range start exceeds end");
  }
  return range;
}

Scenario parse_scenario(const json& value, const std::string& pointer) {
  Scenario scenario;
  scenario.id = require_string(value, "id", pointer);
  if (auto it = value.find("app_name"); it != value.end() && !it->is_null()) {
    if (!it->is_string()) schema_error(pointer + "/app_name", "expected string");
    scenario.app_name = it->get<std::string>();
  }
  scenario.raw_text = require_string(value, "raw_text", pointer);
  const json& sentences = require_array(value, "sentences", pointer);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::string sp = pointer + "/sentences/" + std::to_string(s);
    Sentence sentence;
    sentence.scenario_id = scenario.id;
    sentence.sentence_index =
        require_index(require(sentences[s], "index", sp), sp + "/index");
    const json& tokens = require_array(sentences[s], "tokens", sp);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (!tokens[t].is_string()) {
        schema_error(sp + "/tokens/" + std::to_string(t), "expected string");
      }
      sentence.tokens.push_back(Token{tokens[t].get<std::string>(), t});
    }
    scenario.sentences.push_back(std::move(sentence));
  }
  return scenario;
}

ActionAnnotation parse_annotation(const json& value,
                                  const std::vector<Scenario>& scenarios,
                                  const std::string& pointer) {
  ActionAnnotation a;
  a.sentence.scenario_id = require_string(value, "scenario_id", pointer);
  a.sentence.sentence_index = require_index(
      require(value, "sentence_index", pointer), pointer + "/sentence_index");
  a.verb_range =
      parse_range(require(value, "verb_range", pointer), pointer + "/verb_range");

  std::string category = require_string(value, "category", pointer);
  auto parsed_category = parse_category(category);
  if (!parsed_category) {
    schema_error(pointer + "/category", "unknown category '" + category + "'");
  }
  a.category = *parsed_category;

  std::string actor = require_string(value, "actor", pointer);
  auto parsed_actor = parse_actor(actor);
  if (!parsed_actor) {
    schema_error(pointer + "/actor", "unknown actor '" + actor + "'");
  }
  a.actor = *parsed_actor;
  if (auto it = value.find("actor_name"); it != value.end() && !it->is_null()) {
    if (!it->is_string()) {
      schema_error(pointer + "/actor_name", "expected string");
    }
    a.actor_name = it->get<std::string>();
  }

  if (auto it = value.find("arguments"); it != value.end()) {
    if (!it->is_array()) schema_error(pointer + "/arguments", "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string ap = pointer + "/arguments/" + std::to_string(i);
      std::string kind = require_string((*it)[i], "kind", ap);
      auto parsed_kind = parse_argument_kind(kind);
      if (!parsed_kind) {
        schema_error(ap + "/kind", "unknown argument kind '" + kind + "'");
      }
      a.arguments.push_back(ArgumentSpan{
          *parsed_kind, parse_range(require((*it)[i], "range", ap),
                                    ap + "/range")});
    }
  }

  if (auto it = value.find("verb_lemma"); it != value.end() && !it->is_null()) {
    if (!it->is_string()) {
      schema_error(pointer + "/verb_lemma", "expected string");
    }
    a.verb_lemma = to_lower(it->get<std::string>());
  }
  if (a.verb_lemma.empty()) {
    // Resolve against the raw scenarios so the fallback can read the verb.
    for (const Scenario& scenario : scenarios) {
      if (scenario.id != a.sentence.scenario_id) continue;
      if (a.sentence.sentence_index >= scenario.sentences.size()) break;
      const Sentence& sentence = scenario.sentences[a.sentence.sentence_index];
      if (a.verb_range.valid_for(sentence.tokens.size())) {
        a.verb_lemma = fallback_lemma(sentence.surface(a.verb_range));
      }
      break;
    }
  }
  return a;
}

json range_to_json(const TokenRange& range) {
  return json::array({range.start, range.end});
}

}  // namespace

Corpus parse_corpus(const json& document) {
  if (!document.is_object()) schema_error("", "corpus must be a JSON object");
  std::vector<Scenario> scenarios;
  const json& scenario_array = require_array(document, "scenarios", "");
  for (std::size_t i = 0; i < scenario_array.size(); ++i) {
    scenarios.push_back(
        parse_scenario(scenario_array[i], "/scenarios/" + std::to_string(i)));
  }
  std::vector<ActionAnnotation> gold;
  const json& gold_array = require_array(document, "gold_annotations", "");
  for (std::size_t i = 0; i < gold_array.size(); ++i) {
    gold.push_back(parse_annotation(gold_array[i], scenarios,
                                    "/gold_annotations/" + std::to_string(i)));
  }
  std::vector<AnnotatorRecord> records;
  if (auto it = document.find("annotator_records"); it != document.end()) {
    if (!it->is_array()) {
      schema_error("/annotator_records", "expected array");
    }
    for (std::size_t r = 0; r < it->size(); ++r) {
      std::string rp = "/annotator_records/" + std::to_string(r);
      AnnotatorRecord record;
      record.annotator_id = require_string((*it)[r], "annotator_id", rp);
      record.scenario_id = require_string((*it)[r], "scenario_id", rp);
      const json& annotations = require_array((*it)[r], "annotations", rp);
      for (std::size_t i = 0; i < annotations.size(); ++i) {
        record.annotations.push_back(
            parse_annotation(annotations[i], scenarios,
                             rp + "/annotations/" + std::to_string(i)));
      }
      records.push_back(std::move(record));
    }
  }
  return Corpus(std::move(scenarios), std::move(gold), std::move(records));
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw CorpusError(CorpusError::Kind::kIo, "", "cannot open " + path);
  }
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CorpusError(CorpusError::Kind::kSchema, "",
                      path + ": invalid JSON: " + e.what());
  }
  return parse_corpus(document);
}

json annotation_to_json(const ActionAnnotation& a) {
  json out = {{"scenario_id", a.sentence.scenario_id},
              {"sentence_index", a.sentence.sentence_index},
              {"verb_range", range_to_json(a.verb_range)},
              {"verb_lemma", a.verb_lemma},
              {"category", to_string(a.category)},
              {"actor", to_string(a.actor)}};
  if (!a.actor_name.empty()) out["actor_name"] = a.actor_name;
  json arguments = json::array();
  for (const ArgumentSpan& arg : a.arguments) {
    arguments.push_back(
        {{"kind", to_string(arg.kind)}, {"range", range_to_json(arg.range)}});
  }
  out["arguments"] = std::move(arguments);
  return out;
}

json corpus_to_json(const Corpus& corpus) {
  json scenarios = json::array();
  for (const Scenario& scenario : corpus.scenarios()) {
    json sentences = json::array();
    for (const Sentence& sentence : scenario.sentences) {
      sentences.push_back(
          {{"index", sentence.sentence_index}, {"tokens", sentence.texts()}});
    }
    json s = {{"id", scenario.id},
              {"raw_text", scenario.raw_text},
              {"sentences", std::move(sentences)}};
    if (scenario.app_name) s["app_name"] = *scenario.app_name;
    scenarios.push_back(std::move(s));
  }
  json gold = json::array();
  for (const ActionAnnotation& a : corpus.gold_annotations()) {
    gold.push_back(annotation_to_json(a));
  }
  json out = {{"scenarios", std::move(scenarios)},
              {"gold_annotations", std::move(gold)}};
  if (!corpus.annotator_records().empty()) {
    json records = json::array();
    for (const AnnotatorRecord& r : corpus.annotator_records()) {
      json annotations = json::array();
      for (const ActionAnnotation& a : r.annotations) {
        annotations.push_back(annotation_to_json(a));
      }
      records.push_back({{"annotator_id", r.annotator_id},
                         {"scenario_id", r.scenario_id},
                         {"annotations", std::move(annotations)}});
    }
    out["annotator_records"] = std::move(records);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lint

std::vector<LintFinding> lint_corpus(const Corpus& corpus) {
  std::vector<LintFinding> findings;
  const auto& gold = corpus.gold_annotations();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const ActionAnnotation& a = gold[i];
    const Sentence& sentence = corpus.sentence(a.sentence);
    std::string where = a.sentence.scenario_id + "#" +
                        std::to_string(a.sentence.sentence_index) + " '" +
                        sentence.surface(a.verb_range) + "'";

    if (a.category == Category::kStep) {
      bool has_ui = false;
      bool has_data_type = false;
      for (const ArgumentSpan& arg : a.arguments) {
        has_ui |= arg.kind == ArgumentKind::kUiComponent;
        has_data_type |= arg.kind == ArgumentKind::kDataType;
      }
      if (has_data_type) {
        findings.push_back({"H1", i, where + ": step action carries a data type"});
      }
      if (!has_ui) {
        findings.push_back(
            {"H1", i, where + ": step action has no UI component"});
      }
    }

    for (const ArgumentSpan& arg : a.arguments) {
      for (std::size_t t = arg.range.start + 1; t < arg.range.end; ++t) {
        std::string token = to_lower(sentence.tokens[t].text);
        if (token == "and" || token == "or" || token == ",") {
          findings.push_back(
              {"H5", i,
               where + ": " + std::string(to_string(arg.kind)) + " span '" +
                   sentence.surface(arg.range) +
                   "' holds a list; annotate elements individually"});
          break;
        }
      }
      if (arg.range.overlaps(a.verb_range)) {
        findings.push_back({"overlap", i,
                            where + ": argument '" +
                                sentence.surface(arg.range) +
                                "' overlaps the verb"});
      }
    }
  }
  return findings;
}

// ---------------------------------------------------------------------------
// Split

SplitSizes split_sizes(std::size_t n) {
  // round-half-up(0.2 n) in integer arithmetic.
  std::size_t held_out = (2 * n + 5) / 10;
  return SplitSizes{n - 2 * held_out, held_out, held_out};
}

DatasetSplit split_dataset(const Corpus& corpus, Category category,
                           std::uint64_t seed) {
  std::vector<std::size_t> indices = corpus.annotation_indices(category);
  if (indices.size() < kMinSplitItems) {
    throw std::invalid_argument(
        "split_dataset: category " + std::string(to_string(category)) +
        " has " + std::to_string(indices.size()) + " items, need at least " +
        std::to_string(kMinSplitItems));
  }
  Rng rng(derive_seed(seed, "split/" + std::string(to_string(category))));
  rng.shuffle(std::span<std::size_t>(indices));

  SplitSizes sizes = split_sizes(indices.size());
  DatasetSplit split;
  split.category = category;
  split.seed = seed;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    SplitItem item{corpus.gold_annotations()[indices[i]].sentence, indices[i]};
    if (i < sizes.test) {
      split.test.push_back(std::move(item));
    } else if (i < sizes.test + sizes.validation) {
      split.validation.push_back(std::move(item));
    } else {
      split.train.push_back(std::move(item));
    }
  }
  return split;
}

json split_to_json(const DatasetSplit& split) {
  auto items = [](const std::vector<SplitItem>& list) {
    json out = json::array();
    for (const SplitItem& item : list) {
      out.push_back({{"scenario_id", item.sentence.scenario_id},
                     {"sentence_index", item.sentence.sentence_index},
                     {"annotation", item.annotation_index}});
    }
    return out;
  };
  return {{"category", to_string(split.category)},
          {"seed", split.seed},
          {"sizes",
           {{"train", split.train.size()},
            {"validation", split.validation.size()},
            {"test", split.test.size()}}},
          {"train", items(split.train)},
          {"validation", items(split.validation)},
          {"test", items(split.test)}};
}

// ---------------------------------------------------------------------------
// Agreement

double cohen_kappa(std::span<const std::string> labels_a,
                   std::span<const std::string> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw std::invalid_argument("cohen_kappa: sequences differ in length");
  }
  if (labels_a.empty()) {
    throw std::invalid_argument("cohen_kappa: empty input");
  }
  const double n = static_cast<double>(labels_a.size());
  std::size_t agreements = 0;
  std::map<std::string_view, std::pair<std::size_t, std::size_t>> marginals;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if (labels_a[i] == labels_b[i]) ++agreements;
    ++marginals[labels_a[i]].first;
    ++marginals[labels_b[i]].second;
  }
  if (agreements == labels_a.size()) return 1.0;
  double observed = static_cast<double>(agreements) / n;
  double expected = 0.0;
  for (const auto& [label, counts] : marginals) {
    expected += (static_cast<double>(counts.first) / n) *
                (static_cast<double>(counts.second) / n);
  }
  return (observed - expected) / (1.0 - expected);
}

std::vector<std::string> annotation_to_token_labels(
    const AnnotatorRecord& record, const Scenario& scenario) {
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const Sentence& s : scenario.sentences) {
    offsets.push_back(total);
    total += s.tokens.size();
  }
  std::vector<std::string> labels(total, std::string(kOutsideLabel));
  std::vector<bool> is_verb(total, false);

  auto sentence_of = [&](const ActionAnnotation& a) -> const Sentence& {
    if (a.sentence.scenario_id != scenario.id ||
        a.sentence.sentence_index >= scenario.sentences.size()) {
      throw CorpusError(CorpusError::Kind::kDanglingReference, "",
                        "record " + record.annotator_id +
                            " references sentence outside scenario " +
                            scenario.id);
    }
    return scenario.sentences[a.sentence.sentence_index];
  };

  for (const ActionAnnotation& a : record.annotations) {
    const Sentence& sentence = sentence_of(a);
    if (!a.verb_range.valid_for(sentence.tokens.size())) {
      throw CorpusError(CorpusError::Kind::kOutOfRange, "",
                        "verb_range outside sentence");
    }
    std::size_t base = offsets[a.sentence.sentence_index];
    for (std::size_t t = a.verb_range.start; t <= a.verb_range.end; ++t) {
      labels[base + t] = "verb:" + std::string(display_name(a.category));
      is_verb[base + t] = true;
    }
  }
  for (const ActionAnnotation& a : record.annotations) {
    const Sentence& sentence = sentence_of(a);
    std::size_t base = offsets[a.sentence.sentence_index];
    for (const ArgumentSpan& arg : a.arguments) {
      if (!arg.range.valid_for(sentence.tokens.size())) {
        throw CorpusError(CorpusError::Kind::kOutOfRange, "",
                          "argument range outside sentence");
      }
      for (std::size_t t = arg.range.start; t <= arg.range.end; ++t) {
        if (!is_verb[base + t]) {
          labels[base + t] = "arg:" + std::string(display_name(arg.kind));
        }
      }
    }
  }
  return labels;
}

std::set<std::string> build_verb_lexicon(const Corpus& corpus) {
  std::set<std::string> lexicon;
  for (const ActionAnnotation& a : corpus.gold_annotations()) {
    lexicon.insert(to_lower(a.verb_lemma));
  }
  return lexicon;
}

}  // namespace ropasum
