// SPDX-License-Identifier: Apache-2.0
#include "stancegen/chat.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stancegen/error.hpp"

namespace stancegen {

std::string with_retry(const RetryPolicy& policy, const std::function<std::string()>& fn) {
  auto backoff = policy.initial_backoff;
  const int attempts = policy.attempts < 1 ? 1 : policy.attempts;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransientError&) {
      if (attempt >= attempts) throw;
    }
    if (policy.sleep) {
      policy.sleep(backoff);
    } else {
      std::this_thread::sleep_for(backoff);
    }
    backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
  }
}

HttpChatBackend::HttpChatBackend(Config config) : config_(std::move(config)) {
  if (config_.base_url.empty() || config_.model.empty()) {
    fail(ErrorCode::config_error, "chat backend needs base_url and model");
  }
}

std::string HttpChatBackend::complete(const std::string& prompt, const ChatOptions& options) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      fail(ErrorCode::backend_unavailable,
           "environment variable " + config_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json body{{"model", config_.model},
                      {"temperature", options.temperature},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  for (const auto& [k, v] : options.extra) body[k] = v;

  auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransientError("chat request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransientError("chat backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    fail(ErrorCode::backend_unavailable, "chat backend returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::backend_unavailable, std::string("malformed chat response: ") + e.what());
  }
}

}  // namespace stancegen
