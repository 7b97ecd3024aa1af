#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aiops::llm {

enum class TokenSource { ProviderReported, Approximated };

std::string to_string(TokenSource s);

struct CompletionRequest {
  std::string prompt;
  std::vector<std::string> stop_sequences;
  std::size_t max_output_chars = 32768;
};

struct CompletionResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  TokenSource token_source = TokenSource::Approximated;
  /// "stop" or "length"; "length" means the output was cut by a size limit.
  std::string finish_reason = "stop";
};

/// Transport or provider failure after retries.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, int status = 0, bool timeout = false)
      : std::runtime_error(what), status_(status), timeout_(timeout) {}
  int status() const { return status_; }
  bool timeout() const { return timeout_; }

 private:
  int status_;
  bool timeout_;
};

/// A text completion endpoint. Implementations must be safe to call from
/// several threads at once.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string id() const = 0;
  /// Throws BackendError.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

/// Maximal runs of non-whitespace plus ceil(bytes / 100).
std::int64_t approx_tokens(std::string_view text);

/// Cuts `text` at the earliest occurrence of any stop sequence. Returns true
/// when something was cut.
bool apply_stop_sequences(std::string& text, const std::vector<std::string>& stops);

}  // namespace aiops::llm
