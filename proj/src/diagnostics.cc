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

#include "ropasum/diagnostics.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "ropasum/text.h"

namespace ropasum {

using nlohmann::json;

std::string_view to_string(DiscrepancyCode code) {
  switch (code) {
    case DiscrepancyCode::kAdditionalModifiers:
      return "additional_modifiers";
    case DiscrepancyCode::kIncorrectVerbOrSubject:
      return "incorrect_verb_or_subject";
    case DiscrepancyCode::kMissingDataType:
      return "missing_data_type";
    case DiscrepancyCode::kMissingPurpose:
      return "missing_purpose";
    case DiscrepancyCode::kMissingUiComponent:
      return "missing_ui_component";
    case DiscrepancyCode::kMoreThanTwoVerbs:
      return "more_than_two_verbs";
  }
  return "?";
}

std::optional<DiscrepancyCode> parse_discrepancy_code(std::string_view text) {
  for (DiscrepancyCode code : kAllDiscrepancyCodes) {
    if (to_string(code) == text ||
        std::to_string(static_cast<int>(code)) == text) {
      return code;
    }
  }
  return std::nullopt;
}

namespace {

bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

std::set<std::string> verb_forms(const std::set<std::string>& lexicon) {
  std::set<std::string> forms;
  for (const std::string& lemma : lexicon) {
    if (lemma.empty()) continue;
    for (const std::string& form : {lemma, conjugate_third_person(lemma)}) {
      for (std::string& t : normalize_text(form)) forms.insert(std::move(t));
    }
  }
  return forms;
}

}  // namespace

ExtractivenessResult check_extractiveness(std::string_view generated,
                                          const Sentence& source,
                                          const SummaryTemplate& gold) {
  std::set<std::string> allowed = {"and"};
  for (std::string& t : normalize_text(source.surface())) allowed.insert(t);
  for (std::string& t : normalize_text(gold.actor_surface)) allowed.insert(t);
  for (std::string& t : normalize_text(gold.verb_lemma)) allowed.insert(t);
  for (std::string& t : normalize_text(gold.verb_3sg)) allowed.insert(t);

  ExtractivenessResult result;
  for (std::string& t : normalize_text(generated)) {
    if (!allowed.contains(t)) result.leftovers.push_back(std::move(t));
  }
  result.extractive = result.leftovers.empty();
  return result;
}

std::size_t count_lexicon_verbs(const std::vector<std::string>& tokens,
                                const std::set<std::string>& verb_lexicon) {
  std::size_t n = 0;
  for (const std::string& lemma : verb_lexicon) {
    if (lemma.empty()) continue;
    if (contains_sequence(tokens, normalize_text(lemma)) ||
        contains_sequence(tokens,
                          normalize_text(conjugate_third_person(lemma)))) {
      ++n;
    }
  }
  return n;
}

DiagnosisReport diagnose(std::string_view generated,
                         const SummaryTemplate& gold, const Sentence& source,
                         const std::set<std::string>& verb_lexicon) {
  DiagnosisReport report;
  report.item = SentenceRef{source.scenario_id, source.sentence_index};

  SlotAlignment align = parse_summary(generated, gold);
  if (!align.actor_matched) report.missing.push_back("actor");
  if (!align.verb_matched) report.missing.push_back("verb");
  if (!align.actor_matched || !align.verb_matched) {
    report.codes.insert(DiscrepancyCode::kIncorrectVerbOrSubject);
  }

  std::vector<bool> in_argument(align.tokens.size(), false);
  for (const ArgumentMatch& m : align.arguments) {
    if (m.matched) {
      for (std::size_t p : m.positions) in_argument[p] = true;
      continue;
    }
    report.missing.push_back(std::string(to_string(m.kind)) + ": " + m.text);
    switch (m.kind) {
      case ArgumentKind::kDataType:
        report.codes.insert(DiscrepancyCode::kMissingDataType);
        break;
      case ArgumentKind::kPurpose:
        report.codes.insert(DiscrepancyCode::kMissingPurpose);
        break;
      case ArgumentKind::kUiComponent:
        report.codes.insert(DiscrepancyCode::kMissingUiComponent);
        break;
      case ArgumentKind::kExternalEntity:
        break;
    }
  }

  if (count_lexicon_verbs(align.tokens, verb_lexicon) > 2) {
    report.codes.insert(DiscrepancyCode::kMoreThanTwoVerbs);
  }

  // Leftovers are judged run by run (maximal stretches of adjacent
  // leftover positions).
  const bool other_codes = !report.codes.empty();
  const bool too_many_verbs =
      report.codes.contains(DiscrepancyCode::kMoreThanTwoVerbs);
  const std::set<std::string> forms =
      too_many_verbs ? verb_forms(verb_lexicon) : std::set<std::string>{};
  const auto& pos = align.leftover_positions;
  bool modifiers = false;
  for (std::size_t i = 0; i < pos.size();) {
    std::size_t j = i;
    while (j + 1 < pos.size() && pos[j + 1] == pos[j] + 1) ++j;
    std::size_t first = pos[i];
    std::size_t last = pos[j];
    bool touches_argument =
        (first > 0 && in_argument[first - 1]) ||
        (last + 1 < in_argument.size() && in_argument[last + 1]);
    bool only_verbs = true;
    for (std::size_t k = i; k <= j; ++k) {
      only_verbs &= forms.contains(align.tokens[pos[k]]);
    }
    bool explained = (too_many_verbs && only_verbs) || other_codes;
    if (touches_argument || !explained) modifiers = true;
    i = j + 1;
  }
  if (modifiers) report.codes.insert(DiscrepancyCode::kAdditionalModifiers);

  ExtractivenessResult ext = check_extractiveness(generated, source, gold);
  report.extractive = ext.extractive;
  report.leftovers = align.leftovers;
  return report;
}

double RatioTable::ratio(DiscrepancyCode code) const {
  if (items == 0) return 0.0;
  return static_cast<double>(counts[static_cast<int>(code) - 1]) /
         static_cast<double>(items);
}

std::string RatioTable::format(DiscrepancyCode code) const {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%zu/%zu (%.1f%%)",
                counts[static_cast<int>(code) - 1], items,
                100.0 * ratio(code));
  return buffer;
}

RatioTable aggregate_ratios(std::span<const DiagnosisReport> reports) {
  if (reports.empty()) {
    throw std::invalid_argument("aggregate_ratios: no reports");
  }
  RatioTable table;
  table.items = reports.size();
  for (const DiagnosisReport& r : reports) {
    for (DiscrepancyCode code : r.effective_codes()) {
      ++table.counts[static_cast<int>(code) - 1];
    }
  }
  return table;
}

namespace {

json codes_to_json(const CodeSet& codes) {
  json out = json::array();
  for (DiscrepancyCode c : codes) out.push_back(to_string(c));
  return out;
}

}  // namespace

json diagnosis_to_json(const DiagnosisReport& r) {
  json out = {{"scenario_id", r.item.scenario_id},
              {"sentence_index", r.item.sentence_index},
              {"annotation", r.annotation_index},
              {"codes", codes_to_json(r.codes)},
              {"extractive", r.extractive},
              {"leftovers", r.leftovers},
              {"missing", r.missing}};
  if (r.review_codes) out["review_codes"] = codes_to_json(*r.review_codes);
  return out;
}

json ratio_table_to_json(const RatioTable& table) {
  json rows = json::array();
  for (DiscrepancyCode code : kAllDiscrepancyCodes) {
    rows.push_back({{"code", static_cast<int>(code)},
                    {"name", to_string(code)},
                    {"count", table.counts[static_cast<int>(code) - 1]},
                    {"items", table.items},
                    {"ratio", table.ratio(code)},
                    {"display", table.format(code)}});
  }
  return rows;
}

CodeSet codes_from_json(const json& value) {
  CodeSet codes;
  for (const json& v : value) {
    std::string text = v.is_number_integer() ? std::to_string(v.get<int>())
                                             : v.get<std::string>();
    auto code = parse_discrepancy_code(text);
    if (!code) throw std::invalid_argument("unknown discrepancy code " + text);
    codes.insert(*code);
  }
  return codes;
}

}  // namespace ropasum
