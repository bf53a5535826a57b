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

#ifndef ROPASUM_LLM_CLIENT_H_
#define ROPASUM_LLM_CLIENT_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace ropasum {

enum class Role { kSystem, kUser, kAssistant };
std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::uint32_t max_output_units = 256;
};

// {"model","messages":[{"role","content"}],"temperature","max_tokens"}
nlohmann::json request_to_wire(const ChatRequest& request);

struct ChatResponse {
  std::string text;
  nlohmann::json provider_meta = nlohmann::json::object();
  std::chrono::nanoseconds latency{0};
  bool from_cache = false;
};

class ProviderError : public std::runtime_error {
 public:
  enum class Kind {
    kAuth,          // never retried
    kTransient,     // rate limit or server error; retried
    kMalformed,     // unusable response body
    kUnknownInput,  // mock provider has no gold for the prompt
    kExhausted,     // transient failures outlasted the retry budget
    kOther,
  };

  ProviderError(Kind kind, const std::string& message, int status = 0)
      : std::runtime_error(message), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  int status() const { return status_; }

 private:
  Kind kind_;
  int status_;
};

// Time source for backoff and admission control. Tests swap in VirtualClock.
class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  using duration = std::chrono::steady_clock::duration;

  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_until(time_point deadline) = 0;
  void sleep_for(duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_until(time_point deadline) override;
};

// Simulated time: sleeping jumps the clock forward instantly.
class VirtualClock final : public Clock {
 public:
  time_point now() override;
  void sleep_until(time_point deadline) override;
  void advance(duration d);

 private:
  std::mutex mu_;
  time_point now_{};
};

// Admits at most `per_minute` calls in any 60 second window. Each admission
// holds one of `per_minute` tokens, which returns to the bucket exactly 60
// seconds after it was taken. Zero disables the limit.
class RateLimiter {
 public:
  RateLimiter(std::size_t per_minute, Clock& clock)
      : per_minute_(per_minute), clock_(clock) {}

  // Blocks (on the clock) until a token is free; returns the admission time.
  Clock::time_point acquire();

 private:
  std::size_t per_minute_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Clock::time_point> admissions_;
};

struct RetryPolicy {
  std::chrono::milliseconds initial_delay{1000};
  double factor = 2.0;
  std::size_t max_attempts = 5;
  std::uint64_t jitter_seed = 0;

  // Full jitter: uniform in [0, initial_delay * factor^(attempt-1)).
  std::chrono::nanoseconds delay_before_retry(std::size_t attempt,
                                              std::uint64_t salt) const;
};

struct CallContext {
  std::uint64_t repetition = 0;
  std::size_t attempt = 1;
};

struct ProviderReply {
  std::string text;
  nlohmann::json meta = nlohmann::json::object();
};

// One attempt against a chat-completion backend. Implementations throw
// ProviderError on failure and must be safe to call from several threads.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string id() const = 0;
  virtual ProviderReply send(const ChatRequest& request,
                             const CallContext& context) = 0;
};

struct CacheEntry {
  std::string key;
  std::string model_id;
  std::string response;
  std::int64_t timestamp = 0;  // unix seconds
};

// Content address of a request: model, canonical wire body, repetition.
std::string cache_key(const ChatRequest& request, std::uint64_t repetition);

// Append-only JSON-lines response cache. Each line carries a checksum;
// unreadable lines are reported in warnings() and treated as misses.
class ResponseCache {
 public:
  // In-memory only.
  ResponseCache() = default;
  // Loads existing entries from `path` and appends new ones to it.
  explicit ResponseCache(std::string path);

  std::optional<std::string> lookup(const std::string& key) const;
  // First write wins; later writes for the same key are ignored. Throws
  // std::runtime_error if the file cannot be written.
  void insert(const CacheEntry& entry);

  std::size_t size() const;
  std::vector<std::string> warnings() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::vector<std::string> warnings_;
};

struct ClientOptions {
  RetryPolicy retry;
  std::size_t requests_per_minute = 0;
};

// Retry, admission control and caching around a ChatProvider. Shareable
// across worker threads.
class CompletionClient {
 public:
  CompletionClient(ChatProvider& provider, ClientOptions options,
                   Clock& clock);

  ChatResponse complete(const ChatRequest& request,
                        std::uint64_t repetition = 0);
  ChatResponse cached_complete(const ChatRequest& request,
                               ResponseCache& cache,
                               std::uint64_t repetition);

  ChatProvider& provider() { return provider_; }
  Clock& clock() { return clock_; }
  // Total attempts sent to the provider, retries included.
  std::uint64_t attempts() const;

 private:
  ChatProvider& provider_;
  ClientOptions options_;
  Clock& clock_;
  RateLimiter limiter_;
  mutable std::mutex mu_;
  std::uint64_t attempts_ = 0;
};

// Offline providers keyed by marked input sentence. The prompt's target is
// found on the last line containing a trigger marker, as a suffix that
// starts at a word boundary.
class EchoGoldProvider : public ChatProvider {
 public:
  explicit EchoGoldProvider(
      std::unordered_map<std::string, std::string> gold_by_input);

  std::string id() const override { return "echo_gold"; }
  ProviderReply send(const ChatRequest& request,
                     const CallContext& context) override;

 protected:
  // Returns the (input, gold) pair for the request or throws kUnknownInput.
  std::pair<const std::string*, const std::string*> lookup(
      const ChatRequest& request) const;

 private:
  std::unordered_map<std::string, std::string> gold_by_input_;
};

enum class CorruptionMode { kMixed, kDeletionOnly };

// Per gold token, with probability p: delete it, or (kMixed, half the time)
// insert a random token of the input sentence after it. The noise stream is
// seeded by (seed, request, repetition), so results do not depend on call
// order.
class CorruptGoldProvider final : public EchoGoldProvider {
 public:
  CorruptGoldProvider(std::unordered_map<std::string, std::string> gold_by_input,
                      double noise_rate, std::uint64_t seed,
                      CorruptionMode mode = CorruptionMode::kMixed);

  std::string id() const override;
  ProviderReply send(const ChatRequest& request,
                     const CallContext& context) override;

 private:
  double noise_rate_;
  std::uint64_t seed_;
  CorruptionMode mode_;
};

struct HttpEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};
// Throws std::invalid_argument on URLs without scheme and host.
HttpEndpoint parse_endpoint(const std::string& url);

struct HttpResult {
  int status = 0;
  std::string body;
};

// POSTs a JSON body with a bearer credential. Transport failures throw
// ProviderError(kTransient).
HttpResult post_json(const HttpEndpoint& endpoint, const std::string& api_key,
                     const nlohmann::json& body,
                     std::chrono::seconds timeout);

// Maps HTTP status codes onto ProviderError kinds (401/403 auth, 408/409/429
// and 5xx transient, other 4xx kOther). No-op for 2xx.
void raise_for_status(const HttpResult& result);

// Live chat-completion backend speaking the common wire format.
class HttpChatProvider final : public ChatProvider {
 public:
  HttpChatProvider(std::string url, std::string api_key,
                   std::chrono::seconds timeout = std::chrono::seconds(60));

  // Reads the credential from `env_var`; throws ProviderError(kAuth) when
  // it is unset.
  static std::unique_ptr<HttpChatProvider> from_environment(
      std::string url, const std::string& env_var);

  std::string id() const override { return "live:" + url_; }
  ProviderReply send(const ChatRequest& request,
                     const CallContext& context) override;

 private:
  std::string url_;
  HttpEndpoint endpoint_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

// Extracts choices[0].message.content; throws ProviderError(kMalformed).
std::string parse_chat_response(const std::string& body);

}  // namespace ropasum

#endif  // ROPASUM_LLM_CLIENT_H_
