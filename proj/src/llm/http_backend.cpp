#include "aiops/llm/http_backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <optional>
#include <regex>
#include <stdexcept>
#include <thread>

namespace aiops::llm {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string prefix;
};

std::optional<ParsedUrl> parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/\s]+)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) return std::nullopt;
  std::string prefix = m[2];
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return ParsedUrl{m[1], prefix};
}

}  // namespace

void EndpointConfig::validate() const {
  if (id.empty()) throw std::invalid_argument("endpoint id must not be empty");
  if (model.empty()) throw std::invalid_argument("endpoint " + id + ": model must not be empty");
  if (!parse_url(base_url)) throw std::invalid_argument("endpoint " + id + ": invalid base_url '" + base_url + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base_url.rfind("https://", 0) == 0) {
    throw std::invalid_argument("endpoint " + id + ": https is not available in this build");
  }
#endif
  if (!(timeout_s > 0)) throw std::invalid_argument("endpoint " + id + ": timeout_s must be positive");
  if (requests_per_second < 0) throw std::invalid_argument("endpoint " + id + ": requests_per_second must be >= 0");
  if (max_retries < 0) throw std::invalid_argument("endpoint " + id + ": max_retries must be >= 0");
}

TokenBucket::TokenBucket(double rate_per_s) : rate_(rate_per_s), next_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(1.0 / rate_));
  }
  std::this_thread::sleep_until(slot);
}

HttpBackend::HttpBackend(EndpointConfig config) : config_(std::move(config)), bucket_(config_.requests_per_second) {
  config_.validate();
  const auto url = parse_url(config_.base_url);
  scheme_host_port_ = url->scheme_host_port;
  path_prefix_ = url->prefix;
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
  std::string token;
  if (!config_.token_env.empty()) {
    const char* value = std::getenv(config_.token_env.c_str());
    if (!value || !*value) throw BackendError("environment variable " + config_.token_env + " is not set");
    token = value;
  }
  for (int attempt_no = 0;; ++attempt_no) {
    try {
      bucket_.acquire();
      return attempt(request, token);
    } catch (const BackendError&) {
      if (attempt_no >= config_.max_retries) throw;
      std::this_thread::sleep_for(std::chrono::duration<double>(config_.backoff_s * (1 << attempt_no)));
    }
  }
}

CompletionResponse HttpBackend::attempt(const CompletionRequest& request, const std::string& token) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout_s);
  const auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  nlohmann::json body{{"model", config_.model},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                      {"temperature", 0}};
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  auto res = client.Post(path_prefix_ + "/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timeout = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
    throw BackendError(config_.id + ": " + (timeout ? "timeout" : "transport error: " + httplib::to_string(err)), 0,
                       timeout);
  }
  if (res->status >= 400) {
    throw BackendError(config_.id + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                       res->status);
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError(config_.id + ": response is not JSON: " + res->body.substr(0, 200), res->status);
  }
  const auto* content = doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()
                            ? &doc["choices"][0]
                            : nullptr;
  if (!content || !content->contains("message") || !(*content)["message"].contains("content")) {
    throw BackendError(config_.id + ": response lacks choices[0].message.content", res->status);
  }
  CompletionResponse out;
  const auto& text = (*content)["message"]["content"];
  out.text = text.is_string() ? text.get<std::string>() : std::string();
  if (content->contains("finish_reason") && (*content)["finish_reason"].is_string()) {
    out.finish_reason = (*content)["finish_reason"].get<std::string>();
  }
  // Not every gateway honours "stop".
  apply_stop_sequences(out.text, request.stop_sequences);
  if (out.text.size() > request.max_output_chars) {
    out.text.resize(request.max_output_chars);
    out.finish_reason = "length";
  }
  const auto& usage = doc.contains("usage") ? doc["usage"] : nlohmann::json();
  if (usage.is_object() && usage.contains("prompt_tokens") && usage.contains("completion_tokens") &&
      usage["prompt_tokens"].is_number_integer() && usage["completion_tokens"].is_number_integer()) {
    out.prompt_tokens = usage["prompt_tokens"].get<std::int64_t>();
    out.completion_tokens = usage["completion_tokens"].get<std::int64_t>();
    out.token_source = TokenSource::ProviderReported;
  } else {
    out.prompt_tokens = approx_tokens(request.prompt);
    out.completion_tokens = approx_tokens(out.text);
    out.token_source = TokenSource::Approximated;
  }
  return out;
}

}  // namespace aiops::llm
