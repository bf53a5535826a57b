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

#ifndef ROPASUM_DIAGNOSTICS_H_
#define ROPASUM_DIAGNOSTICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ropasum/corpus.h"
#include "ropasum/gold.h"

namespace ropasum {

// Discrepancy codes between a generated summary and its gold template.
enum class DiscrepancyCode {
  kAdditionalModifiers = 1,
  kIncorrectVerbOrSubject = 2,
  kMissingDataType = 3,
  kMissingPurpose = 4,
  kMissingUiComponent = 5,
  kMoreThanTwoVerbs = 6,
};

inline constexpr std::array<DiscrepancyCode, 6> kAllDiscrepancyCodes = {
    DiscrepancyCode::kAdditionalModifiers,
    DiscrepancyCode::kIncorrectVerbOrSubject,
    DiscrepancyCode::kMissingDataType,
    DiscrepancyCode::kMissingPurpose,
    DiscrepancyCode::kMissingUiComponent,
    DiscrepancyCode::kMoreThanTwoVerbs};

std::string_view to_string(DiscrepancyCode code);
std::optional<DiscrepancyCode> parse_discrepancy_code(std::string_view text);

using CodeSet = std::set<DiscrepancyCode>;

struct ExtractivenessResult {
  bool extractive = true;
  std::vector<std::string> leftovers;
};

// Every normalized token of `generated` must come from the source sentence,
// the actor, the connector "and", or the verb in lemma or third-person form.
ExtractivenessResult check_extractiveness(std::string_view generated,
                                          const Sentence& source,
                                          const SummaryTemplate& gold);

struct DiagnosisReport {
  SentenceRef item;
  std::size_t annotation_index = 0;
  CodeSet codes;                        // automatic coding
  std::optional<CodeSet> review_codes;  // human override, kept apart
  bool extractive = true;
  std::vector<std::string> leftovers;
  std::vector<std::string> missing;  // "<slot>: <argument>" or "actor"/"verb"

  const CodeSet& effective_codes() const {
    return review_codes ? *review_codes : codes;
  }
};

// Automatic coding of one generated summary; codes are independent flags.
//   2  verb (either form) or actor missing
//   3-5  a gold data type / purpose / UI component argument missing
//   6  more than two distinct lexicon verbs present
//   1  leftover tokens that touch a matched argument, or that no other code
//      accounts for
DiagnosisReport diagnose(std::string_view generated,
                         const SummaryTemplate& gold, const Sentence& source,
                         const std::set<std::string>& verb_lexicon);

// Distinct lexicon members present in `text` under lemma or third-person
// form.
std::size_t count_lexicon_verbs(const std::vector<std::string>& tokens,
                                const std::set<std::string>& verb_lexicon);

struct RatioTable {
  std::size_t items = 0;
  std::array<std::size_t, 6> counts{};

  double ratio(DiscrepancyCode code) const;
  // "29/81 (35.8%)"
  std::string format(DiscrepancyCode code) const;
};

// Uses effective codes. Throws std::invalid_argument on an empty input.
RatioTable aggregate_ratios(std::span<const DiagnosisReport> reports);

nlohmann::json diagnosis_to_json(const DiagnosisReport& report);
nlohmann::json ratio_table_to_json(const RatioTable& table);
CodeSet codes_from_json(const nlohmann::json& value);

}  // namespace ropasum

#endif  // ROPASUM_DIAGNOSTICS_H_
