#pragma once

// Chat-completions-compatible HTTP backend. Separate header so that the rest
// of the library does not pull in the HTTP client.

#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "awm/lm.hpp"

namespace awm {

/// Posts {base_url}/chat/completions and reads back
/// choices[0].message.content. Retries transport failures and 429s with
/// exponential backoff per the configured policy.
class HttpLm : public LmClient {
 public:
  explicit HttpLm(LmEndpointConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) {
      throw Error("HttpLm requires a base URL (config or AWM_LM_BASE_URL)");
    }
    split_base_url();
  }

  LmResponse complete(const LmRequest& request) override {
    return with_retries(cfg_.retry, [&] { return post_once(request); });
  }

 private:
  void split_base_url() {
    // host part = scheme://authority, path part = anything after it.
    auto scheme_end = cfg_.base_url.find("://");
    size_t path_start = cfg_.base_url.find(
        '/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
      host_ = cfg_.base_url;
      path_prefix_.clear();
    } else {
      host_ = cfg_.base_url.substr(0, path_start);
      path_prefix_ = cfg_.base_url.substr(path_start);
      while (!path_prefix_.empty() && path_prefix_.back() == '/') {
        path_prefix_.pop_back();
      }
    }
  }

  LmResponse post_once(const LmRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    if (request.system) {
      messages.push_back({{"role", "system"}, {"content", *request.system}});
    }
    messages.push_back({{"role", "user"}, {"content", request.prompt}});
    nlohmann::json body = {
        {"model", request.model.empty() ? cfg_.model : request.model},
        {"messages", messages},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };

    httplib::Client client(host_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    }
    auto res = client.Post(path_prefix_ + "/chat/completions", headers,
                           body.dump(), "application/json");
    if (!res) {
      throw TransportError("request to " + host_ + " failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status == 429) {
      throw RateLimitedError("rate limited by " + host_);
    }
    if (res->status >= 500) {
      throw TransportError("server error " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw BadResponseError("unexpected status " + std::to_string(res->status) +
                             ": " + res->body);
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      LmResponse out;
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (j.contains("usage")) {
        TokenUsage usage;
        usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        usage.completion_tokens = j["usage"].value("completion_tokens", 0);
        out.usage = usage;
      }
      return out;
    } catch (const nlohmann::json::exception& ex) {
      throw BadResponseError(std::string("malformed completion body: ") + ex.what());
    }
  }

  LmEndpointConfig cfg_;
  std::string host_;
  std::string path_prefix_;
};

}  // namespace awm
