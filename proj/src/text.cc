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

#include "ropasum/text.h"

#include <algorithm>
#include <cctype>

namespace ropasum {
namespace {

constexpr std::string_view kSplitPunctuation = ".,;:!?\"()[]";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_split_punctuation(char c) {
  return kSplitPunctuation.find(c) != std::string_view::npos;
}

// Peels punctuation off a marker-free word and appends the pieces.
void emit_word(std::string_view word, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && is_split_punctuation(word[begin])) {
    out.emplace_back(1, word[begin]);
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && is_split_punctuation(word[end - 1])) {
    trailing.emplace_back(1, word[end - 1]);
    --end;
  }
  if (end > begin) out.emplace_back(word.substr(begin, end - begin));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

void emit_chunk(std::string_view chunk, std::vector<std::string>& out) {
  while (!chunk.empty()) {
    std::size_t open = chunk.find(kTriggerOpen);
    std::size_t close = chunk.find(kTriggerClose);
    std::size_t marker = std::min(open, close);
    if (marker == std::string_view::npos) {
      emit_word(chunk, out);
      return;
    }
    emit_word(chunk.substr(0, marker), out);
    std::string_view found = marker == open ? kTriggerOpen : kTriggerClose;
    out.emplace_back(found);
    chunk.remove_prefix(marker + found.size());
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) emit_chunk(text.substr(start, i - start), tokens);
  }
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.append(separator);
    out.append(tokens[i]);
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_punctuation(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
  });
}

std::vector<std::string> normalize_text(std::string_view text) {
  std::vector<std::string> tokens = tokenize(to_lower(text));
  std::erase_if(tokens, [](const std::string& t) {
    return t == kTriggerOpen || t == kTriggerClose || is_punctuation(t);
  });
  return tokens;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size();) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t width = 1;
    if (c >= 0xF0 && c <= 0xF7) {
      width = 4;
    } else if (c >= 0xE0) {
      width = 3;
    } else if (c >= 0xC0) {
      width = 2;
    }
    if (c >= 0x80 && c < 0xC0) width = 1;
    bool valid = i + width <= text.size();
    for (std::size_t k = 1; valid && k < width; ++k) {
      valid = (static_cast<unsigned char>(text[i + k]) & 0xC0) == 0x80;
    }
    i += valid ? width : 1;
    ++count;
  }
  return count;
}

bool contains_whitespace(std::string_view text) {
  return std::any_of(text.begin(), text.end(), is_space);
}

}  // namespace ropasum
