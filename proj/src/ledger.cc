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

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ropasum {

using nlohmann::json;

std::int64_t unix_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string LedgerRecord::key() const {
  std::string index;
  if (repetition) index += "r" + std::to_string(*repetition);
  if (permutation) index += "p" + std::to_string(*permutation);
  return experiment + "|" + config_hash + "|" +
         std::to_string(annotation_index) + "|k" + std::to_string(shots) +
         "|" + index;
}

json record_to_json(const LedgerRecord& r, bool with_timestamps) {
  json out = {{"type", "call"},
              {"experiment", r.experiment},
              {"config_hash", r.config_hash},
              {"prompt_hash", r.prompt_hash},
              {"scenario_id", r.item.scenario_id},
              {"sentence_index", r.item.sentence_index},
              {"annotation", r.annotation_index},
              {"position", r.position},
              {"shots", r.shots},
              {"repetition", r.repetition ? json(*r.repetition) : json()},
              {"permutation", r.permutation ? json(*r.permutation) : json()},
              {"ordering", r.ordering},
              {"input", r.input},
              {"reference", r.reference},
              {"raw_response", r.raw_response},
              {"from_cache", r.from_cache},
              {"failed", r.failed},
              {"error", r.error},
              {"metrics", report_to_json(r.metrics)}};
  if (with_timestamps) {
    out["started_ms"] = r.started_ms;
    out["finished_ms"] = r.finished_ms;
  }
  return out;
}

LedgerRecord record_from_json(const json& v) {
  LedgerRecord r;
  r.experiment = v.at("experiment").get<std::string>();
  r.config_hash = v.at("config_hash").get<std::string>();
  r.prompt_hash = v.at("prompt_hash").get<std::string>();
  r.item.scenario_id = v.at("scenario_id").get<std::string>();
  r.item.sentence_index = v.at("sentence_index").get<std::size_t>();
  r.annotation_index = v.at("annotation").get<std::size_t>();
  r.position = v.at("position").get<std::size_t>();
  r.shots = v.at("shots").get<std::size_t>();
  if (!v.at("repetition").is_null()) {
    r.repetition = v["repetition"].get<std::uint64_t>();
  }
  if (!v.at("permutation").is_null()) {
    r.permutation = v["permutation"].get<std::uint64_t>();
  }
  r.ordering = v.at("ordering").get<std::vector<std::size_t>>();
  r.input = v.at("input").get<std::string>();
  r.reference = v.at("reference").get<std::string>();
  r.raw_response = v.at("raw_response").get<std::string>();
  r.from_cache = v.at("from_cache").get<bool>();
  r.failed = v.at("failed").get<bool>();
  r.error = v.at("error").get<std::string>();
  r.metrics = report_from_json(v.at("metrics"));
  r.started_ms = v.value("started_ms", std::int64_t{0});
  r.finished_ms = v.value("finished_ms", std::int64_t{0});
  return r;
}

namespace {

json header_to_json(const LedgerHeader& h) {
  return {{"type", "header"},
          {"experiment", h.experiment},
          {"config_hash", h.config_hash},
          {"prompt_hash", h.prompt_hash},
          {"config", h.config}};
}

LedgerHeader header_from_json(const json& v) {
  if (v.value("type", "") != "header") {
    throw std::runtime_error("ledger does not start with a header record");
  }
  return LedgerHeader{v.at("experiment").get<std::string>(),
                      v.at("config_hash").get<std::string>(),
                      v.at("prompt_hash").get<std::string>(),
                      v.value("config", json::object())};
}

}  // namespace

LedgerContents read_ledger(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ledger " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();

  LedgerContents contents;
  std::size_t start = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    bool terminated = end != std::string::npos;
    std::string line = text.substr(start, terminated ? end - start
                                                     : std::string::npos);
    start = terminated ? end + 1 : text.size();
    ++line_no;
    if (line.empty()) continue;
    json value;
    try {
      value = json::parse(line);
    } catch (const json::parse_error& e) {
      if (!terminated) {
        contents.warnings.push_back(path + ":" + std::to_string(line_no) +
                                    ": torn final line skipped");
        break;
      }
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed ledger line: " + e.what());
    }
    if (!have_header) {
      contents.header = header_from_json(value);
      have_header = true;
      continue;
    }
    contents.records.push_back(record_from_json(value));
  }
  if (!have_header) throw std::runtime_error("empty ledger " + path);
  return contents;
}

std::vector<std::string> canonical_records(const LedgerContents& contents) {
  std::vector<std::pair<std::string, std::string>> keyed;
  for (const LedgerRecord& r : contents.records) {
    json j = record_to_json(r, false);
    // Cache provenance differs between a first run and a resumed one.
    j.erase("from_cache");
    keyed.emplace_back(r.key(), j.dump());
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::string> out;
  out.push_back(header_to_json(contents.header).dump());
  for (auto& [key, line] : keyed) out.push_back(std::move(line));
  return out;
}

LedgerWriter::LedgerWriter(LedgerHeader header) : header_(std::move(header)) {}

LedgerWriter::LedgerWriter(const std::string& path, LedgerHeader header)
    : path_(path), header_(std::move(header)) {
  namespace fs = std::filesystem;
  if (fs::exists(path_) && fs::file_size(path_) > 0) {
    LedgerContents existing = read_ledger(path_);
    if (existing.header.config_hash != header_.config_hash ||
        existing.header.experiment != header_.experiment) {
      throw LedgerMismatchError("ledger " + path_ + " belongs to config " +
                                existing.header.config_hash + ", not " +
                                header_.config_hash);
    }
    if (existing.header.prompt_hash != header_.prompt_hash) {
      throw LedgerMismatchError("ledger " + path_ +
                                " was written with a different prompt "
                                "template");
    }
    warnings_ = existing.warnings;
    for (LedgerRecord& r : existing.records) {
      by_key_.emplace(r.key(), records_.size());
      records_.push_back(std::move(r));
    }
    // Drop a torn tail so the next append starts on a fresh line.
    std::ifstream in(path_, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    std::size_t keep = text.rfind('\n');
    keep = keep == std::string::npos ? 0 : keep + 1;
    if (keep != text.size()) fs::resize_file(path_, keep);
  } else {
    std::ofstream out(path_, std::ios::trunc);
    out << header_to_json(header_).dump() << '\n';
    if (!out) throw std::runtime_error("cannot write ledger " + path_);
  }
}

std::optional<LedgerRecord> LedgerWriter::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return records_[it->second];
}

void LedgerWriter::append(const LedgerRecord& record) {
  std::lock_guard lock(mu_);
  std::string key = record.key();
  if (by_key_.contains(key)) {
    throw std::logic_error("duplicate ledger record " + key);
  }
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << record_to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to ledger " + path_);
  }
  by_key_.emplace(std::move(key), records_.size());
  records_.push_back(record);
}

std::vector<LedgerRecord> LedgerWriter::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t LedgerWriter::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace ropasum
