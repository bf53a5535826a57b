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

#include "ropasum/llm_client.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>
#include <utility>

#include "httplib.h"
#include "ropasum/hashing.h"
#include "ropasum/random.h"
#include "ropasum/text.h"

namespace ropasum {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

json request_to_wire(const ChatRequest& request) {
  json messages = json::array();
  for (const ChatMessage& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model_id},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_units}};
}

// ---------------------------------------------------------------------------
// Clocks and admission

void SystemClock::sleep_until(time_point deadline) {
  std::this_thread::sleep_until(deadline);
}

Clock::time_point VirtualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::sleep_until(time_point deadline) {
  std::lock_guard lock(mu_);
  now_ = std::max(now_, deadline);
}

void VirtualClock::advance(duration d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

Clock::time_point RateLimiter::acquire() {
  if (per_minute_ == 0) return clock_.now();
  constexpr auto kWindow = std::chrono::seconds(60);
  while (true) {
    Clock::time_point wake;
    {
      std::lock_guard lock(mu_);
      Clock::time_point now = clock_.now();
      while (!admissions_.empty() && admissions_.front() + kWindow <= now) {
        admissions_.pop_front();
      }
      if (admissions_.size() < per_minute_) {
        admissions_.push_back(now);
        return now;
      }
      wake = admissions_.front() + kWindow;
    }
    clock_.sleep_until(wake);
  }
}

std::chrono::nanoseconds RetryPolicy::delay_before_retry(
    std::size_t attempt, std::uint64_t salt) const {
  double ceiling = static_cast<double>(
                       std::chrono::nanoseconds(initial_delay).count()) *
                   std::pow(factor, static_cast<double>(attempt - 1));
  Rng rng(derive_seed(jitter_seed, "retry", salt ^ attempt));
  return std::chrono::nanoseconds(
      static_cast<std::int64_t>(rng.uniform_real() * ceiling));
}

// ---------------------------------------------------------------------------
// Cache

std::string cache_key(const ChatRequest& request, std::uint64_t repetition) {
  return sha256_hex(request.model_id + "\n" + request_to_wire(request).dump() +
                    "\n" + std::to_string(repetition));
}

namespace {

std::string entry_checksum(const std::string& key, const std::string& text) {
  return sha256_hex(key + "\n" + text).substr(0, 16);
}

}  // namespace

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;  // a fresh cache
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::string key = j.at("key").get<std::string>();
      std::string response = j.at("response").get<std::string>();
      if (j.at("checksum").get<std::string>() != entry_checksum(key, response)) {
        throw std::runtime_error("checksum mismatch");
      }
      entries_.emplace(std::move(key), std::move(response));
    } catch (const std::exception& e) {
      warnings_.push_back(path_ + ":" + std::to_string(line_no) +
                          ": corrupt cache line ignored (" + e.what() + ")");
    }
  }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::insert(const CacheEntry& entry) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(entry.key, entry.response).second) return;
  if (path_.empty()) return;
  json line = {{"key", entry.key},
               {"model", entry.model_id},
               {"response", entry.response},
               {"timestamp", entry.timestamp},
               {"checksum", entry_checksum(entry.key, entry.response)}};
  std::ofstream out(path_, std::ios::app);
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to cache " + path_);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<std::string> ResponseCache::warnings() const {
  std::lock_guard lock(mu_);
  return warnings_;
}

// ---------------------------------------------------------------------------
// Client

CompletionClient::CompletionClient(ChatProvider& provider,
                                   ClientOptions options, Clock& clock)
    : provider_(provider),
      options_(options),
      clock_(clock),
      limiter_(options.requests_per_minute, clock) {}

std::uint64_t CompletionClient::attempts() const {
  std::lock_guard lock(mu_);
  return attempts_;
}

ChatResponse CompletionClient::complete(const ChatRequest& request,
                                        std::uint64_t repetition) {
  if (request.messages.empty()) {
    throw std::invalid_argument("chat request needs at least one message");
  }
  const std::uint64_t salt =
      stable_hash(cache_key(request, repetition));
  const std::size_t max_attempts = std::max<std::size_t>(1, options_.retry.max_attempts);
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    limiter_.acquire();
    {
      std::lock_guard lock(mu_);
      ++attempts_;
    }
    auto start = clock_.now();
    try {
      ProviderReply reply =
          provider_.send(request, CallContext{repetition, attempt});
      ChatResponse response;
      response.text = std::move(reply.text);
      response.provider_meta = std::move(reply.meta);
      response.latency = clock_.now() - start;
      return response;
    } catch (const ProviderError& e) {
      if (e.kind() != ProviderError::Kind::kTransient) throw;
      last_error = e.what();
    }
    if (attempt < max_attempts) {
      clock_.sleep_for(options_.retry.delay_before_retry(attempt, salt));
    }
  }
  throw ProviderError(ProviderError::Kind::kExhausted,
                      "giving up after " + std::to_string(max_attempts) +
                          " attempts: " + last_error);
}

ChatResponse CompletionClient::cached_complete(const ChatRequest& request,
                                               ResponseCache& cache,
                                               std::uint64_t repetition) {
  std::string key = cache_key(request, repetition);
  if (auto hit = cache.lookup(key)) {
    ChatResponse response;
    response.text = std::move(*hit);
    response.from_cache = true;
    return response;
  }
  ChatResponse response = complete(request, repetition);
  cache.insert(CacheEntry{key, request.model_id, response.text,
                          static_cast<std::int64_t>(std::time(nullptr))});
  return response;
}

// ---------------------------------------------------------------------------
// Mock providers

EchoGoldProvider::EchoGoldProvider(
    std::unordered_map<std::string, std::string> gold_by_input)
    : gold_by_input_(std::move(gold_by_input)) {}

std::pair<const std::string*, const std::string*> EchoGoldProvider::lookup(
    const ChatRequest& request) const {
  if (request.messages.empty()) {
    throw ProviderError(ProviderError::Kind::kUnknownInput, "empty request");
  }
  const std::string& content = request.messages.back().content;
  std::size_t marker = content.rfind(kTriggerOpen);
  if (marker == std::string::npos) {
    throw ProviderError(ProviderError::Kind::kUnknownInput,
                        "no marked sentence in the last message");
  }
  std::size_t line_start = content.rfind('\n', marker);
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  std::size_t line_end = content.find('\n', marker);
  std::string_view line(content.data() + line_start,
                        (line_end == std::string::npos ? content.size()
                                                       : line_end) -
                            line_start);
  for (std::size_t p = 0; p < line.size(); ++p) {
    if (p > 0 && line[p - 1] != ' ') continue;
    auto it = gold_by_input_.find(std::string(line.substr(p)));
    if (it != gold_by_input_.end()) return {&it->first, &it->second};
  }
  throw ProviderError(ProviderError::Kind::kUnknownInput,
                      "no gold summary for: " + std::string(line));
}

ProviderReply EchoGoldProvider::send(const ChatRequest& request,
                                     const CallContext&) {
  return ProviderReply{*lookup(request).second, {{"provider", id()}}};
}

CorruptGoldProvider::CorruptGoldProvider(
    std::unordered_map<std::string, std::string> gold_by_input,
    double noise_rate, std::uint64_t seed, CorruptionMode mode)
    : EchoGoldProvider(std::move(gold_by_input)),
      noise_rate_(noise_rate),
      seed_(seed),
      mode_(mode) {
  if (noise_rate < 0.0 || noise_rate > 1.0) {
    throw std::invalid_argument("corrupt_gold: noise rate outside [0,1]");
  }
}

std::string CorruptGoldProvider::id() const {
  return "corrupt_gold:" + json(noise_rate_).dump();
}

ProviderReply CorruptGoldProvider::send(const ChatRequest& request,
                                        const CallContext& context) {
  auto [input, gold] = lookup(request);
  std::vector<std::string> source = tokenize(*input);
  std::erase_if(source, [](const std::string& t) {
    return t == kTriggerOpen || t == kTriggerClose;
  });
  std::uint64_t salt =
      stable_hash(request_to_wire(request).dump());
  Rng rng(derive_seed(seed_, "corrupt_gold", salt ^ context.repetition));
  std::vector<std::string> out;
  for (const std::string& token : tokenize(*gold)) {
    if (!rng.bernoulli(noise_rate_)) {
      out.push_back(token);
      continue;
    }
    bool insert = mode_ == CorruptionMode::kMixed && rng.bernoulli(0.5) &&
                  !source.empty();
    if (insert) {
      out.push_back(token);
      out.push_back(source[rng.uniform_index(source.size())]);
    }
  }
  return ProviderReply{join_tokens(out), {{"provider", id()}}};
}

// ---------------------------------------------------------------------------
// HTTP

HttpEndpoint parse_endpoint(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos || scheme == 0) {
    throw std::invalid_argument("endpoint URL needs a scheme: " + url);
  }
  std::size_t path = url.find('/', scheme + 3);
  HttpEndpoint endpoint;
  endpoint.base = url.substr(0, path);
  endpoint.path = path == std::string::npos ? "/" : url.substr(path);
  if (endpoint.base.size() <= scheme + 3) {
    throw std::invalid_argument("endpoint URL needs a host: " + url);
  }
  return endpoint;
}

HttpResult post_json(const HttpEndpoint& endpoint, const std::string& api_key,
                     const json& body, std::chrono::seconds timeout) {
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key);
  }
  auto result =
      client.Post(endpoint.path, headers, body.dump(), "application/json");
  if (!result) {
    throw ProviderError(ProviderError::Kind::kTransient,
                        "transport error: " + httplib::to_string(result.error()));
  }
  return HttpResult{result->status, result->body};
}

void raise_for_status(const HttpResult& result) {
  const int s = result.status;
  if (s >= 200 && s < 300) return;
  std::string message =
      "HTTP " + std::to_string(s) + ": " + result.body.substr(0, 200);
  if (s == 401 || s == 403) {
    throw ProviderError(ProviderError::Kind::kAuth, message, s);
  }
  if (s == 408 || s == 409 || s == 429 || s >= 500) {
    throw ProviderError(ProviderError::Kind::kTransient, message, s);
  }
  throw ProviderError(ProviderError::Kind::kOther, message, s);
}

std::string parse_chat_response(const std::string& body) {
  try {
    json j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception& e) {
    throw ProviderError(ProviderError::Kind::kMalformed,
                        std::string("malformed chat response: ") + e.what());
  }
}

HttpChatProvider::HttpChatProvider(std::string url, std::string api_key,
                                   std::chrono::seconds timeout)
    : url_(std::move(url)),
      endpoint_(parse_endpoint(url_)),
      api_key_(std::move(api_key)),
      timeout_(timeout) {}

std::unique_ptr<HttpChatProvider> HttpChatProvider::from_environment(
    std::string url, const std::string& env_var) {
  const char* key = std::getenv(env_var.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError(ProviderError::Kind::kAuth,
                        "credential variable " + env_var + " is not set");
  }
  return std::make_unique<HttpChatProvider>(std::move(url), key);
}

ProviderReply HttpChatProvider::send(const ChatRequest& request,
                                     const CallContext&) {
  HttpResult result =
      post_json(endpoint_, api_key_, request_to_wire(request), timeout_);
  raise_for_status(result);
  ProviderReply reply;
  reply.text = parse_chat_response(result.body);
  try {
    json j = json::parse(result.body);
    if (j.contains("model")) reply.meta["model"] = j["model"];
    if (j.contains("usage")) reply.meta["usage"] = j["usage"];
  } catch (const std::exception&) {
  }
  return reply;
}

}  // namespace ropasum
