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

#include "ropasum/ledger.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace ropasum {
namespace {

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "ropasum_ledger_test";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p.string();
}

LedgerHeader header(const std::string& hash = "cfg") {
  return {"sweep-shots", hash, "prompt", {{"seed", 7}}};
}

LedgerRecord record(std::size_t position, std::uint64_t repetition) {
  LedgerRecord r;
  r.experiment = "sweep-shots";
  r.config_hash = "cfg";
  r.prompt_hash = "prompt";
  r.item = {"s" + std::to_string(position), 0};
  r.annotation_index = position;
  r.position = position;
  r.shots = 2;
  r.repetition = repetition;
  r.ordering = {0, 1};
  r.input = "I want to get promotions .";
  r.reference = "User gets promotions";
  r.raw_response = "User gets promotions";
  r.metrics.rougeL = ScoreTriple::from(1.0 / 3.0, 0.5);
  r.metrics.meteor = ScoreTriple::from(0.1, 0.2);
  r.started_ms = 100 + position;
  r.finished_ms = 200 + position;
  return r;
}

TEST(LedgerTest, RecordJsonRoundTrip) {
  LedgerRecord r = record(3, 1);
  r.permutation = 5;
  r.failed = true;
  r.error = "timeout";
  LedgerRecord back = record_from_json(record_to_json(r));
  EXPECT_EQ(record_to_json(back), record_to_json(r));
  EXPECT_EQ(back.metrics.rougeL.precision, r.metrics.rougeL.precision);
  EXPECT_FALSE(record_to_json(r, false).contains("started_ms"));
  EXPECT_NE(record(3, 1).key(), record(3, 2).key());
  EXPECT_NE(record(3, 1).key(), record(4, 1).key());
}

TEST(LedgerTest, WriteReadAndResume) {
  std::string path = temp_path("resume.jsonl");
  {
    LedgerWriter w(path, header());
    w.append(record(0, 0));
    w.append(record(1, 0));
  }
  LedgerContents c = read_ledger(path);
  EXPECT_EQ(c.header.config_hash, "cfg");
  ASSERT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.records[1].metrics.rougeL.recall, 0.5);

  LedgerWriter resumed(path, header());
  EXPECT_EQ(resumed.size(), 2u);
  EXPECT_TRUE(resumed.find(record(1, 0).key()));
  EXPECT_FALSE(resumed.find(record(2, 0).key()));
  EXPECT_THROW(resumed.append(record(1, 0)), std::logic_error);
  resumed.append(record(2, 0));
  EXPECT_EQ(read_ledger(path).records.size(), 3u);
}

TEST(LedgerTest, ResumeWithOtherConfigIsRefused) {
  std::string path = temp_path("mismatch.jsonl");
  { LedgerWriter w(path, header()); }
  EXPECT_THROW(LedgerWriter(path, header("other")), LedgerMismatchError);
}

TEST(LedgerTest, TornFinalLineIsSkipped) {
  std::string path = temp_path("torn.jsonl");
  {
    LedgerWriter w(path, header());
    w.append(record(0, 0));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"experiment":"sweep-shots","config_ha)";
  }
  LedgerContents c = read_ledger(path);
  EXPECT_EQ(c.records.size(), 1u);
  EXPECT_EQ(c.warnings.size(), 1u);

  LedgerWriter w(path, header());
  w.append(record(1, 0));
  EXPECT_EQ(read_ledger(path).records.size(), 2u);
}

TEST(LedgerTest, MalformedMiddleLineThrows) {
  std::string path = temp_path("bad.jsonl");
  {
    LedgerWriter w(path, header());
    w.append(record(0, 0));
  }
  std::string text;
  {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    text = line + "\n{garbage\n";
    std::getline(in, line);
    text += line + "\n";
  }
  std::ofstream(path) << text;
  EXPECT_THROW(read_ledger(path), std::runtime_error);
}

TEST(LedgerTest, CanonicalFormIgnoresOrderAndTimestamps) {
  LedgerWriter a(header());
  LedgerWriter b(header());
  a.append(record(0, 0));
  a.append(record(1, 0));
  LedgerRecord late = record(1, 0);
  late.started_ms = 9999;
  late.finished_ms = 10000;
  b.append(late);
  b.append(record(0, 0));
  LedgerContents ca{header(), a.records(), {}};
  LedgerContents cb{header(), b.records(), {}};
  EXPECT_EQ(canonical_records(ca), canonical_records(cb));
  LedgerRecord changed = record(0, 0);
  changed.raw_response = "App gets promotions";
  LedgerContents cc{header(), {changed, record(1, 0)}, {}};
  EXPECT_NE(canonical_records(ca), canonical_records(cc));
}

}  // namespace
}  // namespace ropasum
