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

#ifndef ROPASUM_LEDGER_H_
#define ROPASUM_LEDGER_H_

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ropasum/corpus.h"
#include "ropasum/metrics.h"

namespace ropasum {

struct LedgerHeader {
  std::string experiment;  // "sweep-shots", "sweep-perms" or "final-eval"
  std::string config_hash;
  std::string prompt_hash;
  nlohmann::json config = nlohmann::json::object();
};

// One provider call and its scores.
struct LedgerRecord {
  std::string experiment;
  std::string config_hash;
  std::string prompt_hash;
  SentenceRef item;
  std::size_t annotation_index = 0;
  std::size_t position = 0;  // index of the item within its evaluation set
  std::size_t shots = 0;
  std::optional<std::uint64_t> repetition;
  std::optional<std::uint64_t> permutation;
  std::vector<std::size_t> ordering;
  std::string input;
  std::string reference;
  std::string raw_response;
  bool from_cache = false;
  bool failed = false;
  std::string error;
  MetricReport metrics;
  std::int64_t started_ms = 0;
  std::int64_t finished_ms = 0;

  // (config, item, index) identity; unique within a ledger.
  std::string key() const;
};

nlohmann::json record_to_json(const LedgerRecord& record,
                              bool with_timestamps = true);
LedgerRecord record_from_json(const nlohmann::json& value);

class LedgerMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LedgerContents {
  LedgerHeader header;
  std::vector<LedgerRecord> records;
  std::vector<std::string> warnings;
};

// Reads a ledger. A torn final line (from a crash mid-write) is skipped with
// a warning; any other malformed line throws std::runtime_error.
LedgerContents read_ledger(const std::string& path);

// Timestamp-free records sorted by key. Two ledgers describe the same run iff
// their canonical forms are equal.
std::vector<std::string> canonical_records(const LedgerContents& contents);

// Append-only JSON-lines ledger. Opening an existing file resumes it: the
// header must carry the same config hash and already recorded keys are
// reported by find().
class LedgerWriter {
 public:
  // In-memory ledger, for tests and dry runs.
  explicit LedgerWriter(LedgerHeader header);
  LedgerWriter(const std::string& path, LedgerHeader header);

  const LedgerHeader& header() const { return header_; }
  std::optional<LedgerRecord> find(const std::string& key) const;
  // Throws std::logic_error on a duplicate key.
  void append(const LedgerRecord& record);
  std::vector<LedgerRecord> records() const;
  std::size_t size() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::string path_;
  LedgerHeader header_;
  mutable std::mutex mu_;
  std::vector<LedgerRecord> records_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::vector<std::string> warnings_;
};

std::int64_t unix_millis();

}  // namespace ropasum

#endif  // ROPASUM_LEDGER_H_
