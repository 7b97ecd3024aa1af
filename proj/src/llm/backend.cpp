#include "aiops/llm/backend.hpp"

namespace aiops::llm {

std::string to_string(TokenSource s) {
  return s == TokenSource::ProviderReported ? "provider_reported" : "approximated";
}

std::int64_t approx_tokens(std::string_view text) {
  std::int64_t runs = 0;
  bool in_run = false;
  for (char c : text) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!ws && !in_run) ++runs;
    in_run = !ws;
  }
  return runs + static_cast<std::int64_t>((text.size() + 99) / 100);
}

bool apply_stop_sequences(std::string& text, const std::vector<std::string>& stops) {
  auto cut = std::string::npos;
  for (const auto& s : stops) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  if (cut == std::string::npos) return false;
  text.resize(cut);
  return true;
}

}  // namespace aiops::llm
