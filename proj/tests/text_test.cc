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

#include <gtest/gtest.h>

namespace ropasum {
namespace {

using Tokens = std::vector<std::string>;

TEST(TokenizeTest, SplitsWhitespaceAndPeelsPunctuation) {
  EXPECT_EQ(tokenize("I get promotions, daily."),
            (Tokens{"I", "get", "promotions", ",", "daily", "."}));
  EXPECT_EQ(tokenize("  (the \"menu\")  "),
            (Tokens{"(", "the", "\"", "menu", "\"", ")"}));
}

TEST(TokenizeTest, KeepsApostrophesInsideWords) {
  EXPECT_EQ(tokenize("don't stop"), (Tokens{"don't", "stop"}));
}

TEST(TokenizeTest, SeparatesTriggerMarkers) {
  std::string marked = std::string("I ") + std::string(kTriggerOpen) + "get" +
                       std::string(kTriggerClose) + " it";
  EXPECT_EQ(tokenize(marked),
            (Tokens{"I", std::string(kTriggerOpen), "get",
                    std::string(kTriggerClose), "it"}));
}

TEST(TokenizeTest, EmptyInput) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n").empty());
}

TEST(NormalizeTest, LowercasesAndDropsMarkersAndPunctuation) {
  std::string marked = std::string("User ") + std::string(kTriggerOpen) +
                       "Gets" + std::string(kTriggerClose) + " promotions .";
  EXPECT_EQ(normalize_text(marked), (Tokens{"user", "gets", "promotions"}));
}

TEST(TextTest, Utf8Length) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length(kTriggerOpen), 5u);
  EXPECT_EQ(utf8_length(""), 0u);
}

TEST(TextTest, JoinAndPunctuation) {
  EXPECT_EQ(join_tokens(Tokens{"a", "b", "c"}), "a b c");
  EXPECT_EQ(join_tokens(Tokens{"a", "b"}, "|"), "a|b");
  EXPECT_TRUE(is_punctuation(".,"));
  EXPECT_FALSE(is_punctuation("a."));
  EXPECT_EQ(to_lower("ÄBc"), "Äbc");
}

}  // namespace
}  // namespace ropasum
