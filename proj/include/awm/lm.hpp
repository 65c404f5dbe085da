#pragma once

#include <chrono>
#include <cstdlib>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "awm/errors.hpp"

namespace awm {

struct LmRequest {
  std::optional<std::string> system;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string model = "default";
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct LmResponse {
  std::string text;
  std::optional<TokenUsage> usage;
};

/// Text-completion contract shared by every backend: one prompt in, one
/// generation out.
class LmClient {
 public:
  virtual ~LmClient() = default;
  virtual LmResponse complete(const LmRequest& request) = 0;
};

/// Deterministic scripted backend for tests and offline runs.
///
/// Two modes: an ordered response queue, or a routing table that matches the
/// first entry whose key is a substring of the prompt. Every request is
/// recorded for assertions.
class MockLm : public LmClient {
 public:
  MockLm() = default;

  explicit MockLm(std::vector<std::string> scripted) {
    for (auto& s : scripted) queue_.push_back(std::move(s));
  }

  void push_response(std::string text) {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back(std::move(text));
  }

  /// Requests whose prompt contains `needle` answer with `response`.
  /// Routes are checked in insertion order and win over the queue.
  void add_route(std::string needle, std::string response) {
    std::lock_guard<std::mutex> lock(mu_);
    routes_.emplace_back(std::move(needle), std::move(response));
  }

  LmResponse complete(const LmRequest& request) override {
    std::lock_guard<std::mutex> lock(mu_);
    requests_.push_back(request);
    for (const auto& [needle, response] : routes_) {
      if (request.prompt.find(needle) != std::string::npos) {
        return {response, std::nullopt};
      }
    }
    if (queue_.empty()) {
      throw ScriptExhaustedError("mock backend has no response for request #" +
                                 std::to_string(requests_.size()));
    }
    LmResponse r{queue_.front(), std::nullopt};
    queue_.pop_front();
    return r;
  }

  const std::vector<LmRequest>& requests() const { return requests_; }
  size_t call_count() const { return requests_.size(); }
  size_t remaining() const { return queue_.size(); }

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  std::vector<std::pair<std::string, std::string>> routes_;
  std::vector<LmRequest> requests_;
};

/// A backend that fails every call; useful for exercising error paths.
class FailingLm : public LmClient {
 public:
  explicit FailingLm(std::string message = "backend unavailable")
      : message_(std::move(message)) {}
  LmResponse complete(const LmRequest&) override {
    ++calls_;
    throw TransportError(message_);
  }
  int calls() const { return calls_; }

 private:
  std::string message_;
  int calls_ = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  std::function<void(std::chrono::milliseconds)> sleep =
      [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

/// Run `fn` with exponential backoff on RateLimited/Transport errors.
/// The caller sees one logical call and one response.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  int attempt = 0;
  for (;;) {
    try {
      return fn();
    } catch (const RateLimitedError&) {
      if (++attempt >= policy.max_attempts) throw;
    } catch (const TransportError&) {
      if (++attempt >= policy.max_attempts) throw;
    }
    auto delay = policy.base_delay * (1 << (attempt - 1));
    if (policy.sleep && delay.count() > 0) policy.sleep(delay);
  }
}

struct LmEndpointConfig {
  std::string base_url;  // e.g. http://localhost:8080/v1
  std::string api_key;
  std::string model = "default";
  double temperature = 0.0;
  int max_tokens = 1024;
  RetryPolicy retry;
};

/// Apply AWM_LM_BASE_URL / AWM_LM_API_KEY / AWM_LM_MODEL on top of a config.
inline LmEndpointConfig apply_env_overrides(LmEndpointConfig cfg) {
  if (const char* v = std::getenv("AWM_LM_BASE_URL")) cfg.base_url = v;
  if (const char* v = std::getenv("AWM_LM_API_KEY")) cfg.api_key = v;
  if (const char* v = std::getenv("AWM_LM_MODEL")) cfg.model = v;
  return cfg;
}

}  // namespace awm
