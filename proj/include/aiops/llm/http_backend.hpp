#pragma once

#include <chrono>
#include <mutex>
#include <string>

#include "aiops/llm/backend.hpp"

namespace aiops::llm {

struct EndpointConfig {
  std::string id;
  std::string base_url;   // scheme://host[:port][/prefix]
  std::string model;
  std::string token_env;  // environment variable holding the bearer token; empty for none
  double timeout_s = 60.0;
  double requests_per_second = 0.0;  // 0 disables rate limiting
  int max_retries = 1;
  double backoff_s = 0.5;  // first retry delay, doubled per attempt

  /// Throws std::invalid_argument for a missing id/model or a malformed URL.
  void validate() const;
};

/// Blocking token bucket; capacity one request.
class TokenBucket {
 public:
  explicit TokenBucket(double rate_per_s);
  void acquire();

 private:
  double rate_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_;
};

/// OpenAI-shaped chat-completions endpoint.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(EndpointConfig config);

  std::string id() const override { return config_.id; }
  CompletionResponse complete(const CompletionRequest& request) override;

  const EndpointConfig& config() const { return config_; }

 private:
  CompletionResponse attempt(const CompletionRequest& request, const std::string& token);

  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  TokenBucket bucket_;
};

}  // namespace aiops::llm
