// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace stancegen {

/// A failure worth retrying (timeouts, 429/5xx).
class TransientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatOptions {
  double temperature = 0.0;
  std::map<std::string, double> extra;  // passed through verbatim (top_p, ...)
};

/// Generic single-turn chat completion.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& prompt, const ChatOptions& options) = 0;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  /// Sleep hook; tests substitute a recorder.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Runs fn, retrying on TransientError with exponential backoff. The last
/// TransientError is rethrown when attempts run out; other exceptions pass
/// straight through.
std::string with_retry(const RetryPolicy& policy, const std::function<std::string()>& fn);

/// OpenAI-compatible POST {base_url}/v1/chat/completions. The API key is read
/// from the named environment variable at call time and never stored.
class HttpChatBackend final : public ChatBackend {
 public:
  struct Config {
    std::string base_url;  // e.g. "https://api.example.com" or "http://127.0.0.1:8080"
    std::string model;
    std::string api_key_env;  // empty: no Authorization header
    std::chrono::seconds timeout{60};
  };

  explicit HttpChatBackend(Config config);
  std::string complete(const std::string& prompt, const ChatOptions& options) override;

 private:
  Config config_;
};

}  // namespace stancegen
