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

#ifndef ROPASUM_TEXT_H_
#define ROPASUM_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ropasum {

// Trigger markers wrapped around the target action verb of a sentence.
inline constexpr std::string_view kTriggerOpen = "⟨tgr⟩";
inline constexpr std::string_view kTriggerClose = "⟨/tgr⟩";

// Splits `text` into tokens.
//
// Rules, applied in order to every whitespace-delimited chunk:
//   * the trigger markers become standalone tokens wherever they occur;
//   * leading and trailing characters from the set .,;:!?"()[] are peeled
//     off one character at a time, each becoming its own token;
//   * everything else, including apostrophes, stays inside the word.
//
// Deterministic, locale independent, and idempotent on its own output
// re-joined with single spaces.
std::vector<std::string> tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens,
                        std::string_view separator = " ");

// ASCII lowercase; non-ASCII bytes are left untouched.
std::string to_lower(std::string_view text);

// True if every byte of `token` is ASCII punctuation.
bool is_punctuation(std::string_view token);

// Scoring normalization shared by the metrics and the diagnostics:
// lowercase, drop trigger markers, tokenize, drop pure-punctuation tokens.
std::vector<std::string> normalize_text(std::string_view text);

// Number of Unicode code points in a UTF-8 string. Malformed bytes count as
// one code point each.
std::size_t utf8_length(std::string_view text);

bool contains_whitespace(std::string_view text);

}  // namespace ropasum

#endif  // ROPASUM_TEXT_H_
