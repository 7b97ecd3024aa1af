#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>

#include "aiops/agent/react.hpp"
#include "aiops/domain/types.hpp"
#include "aiops/llm/backend.hpp"
#include "aiops/tools/registry.hpp"

namespace aiops::agent {

struct AgentLimits {
  int max_iterations = 15;
  std::size_t max_output_chars = 32768;
  double wall_timeout_s = 180.0;
  int malformed_retry_budget = 1;

  /// Throws std::invalid_argument unless every limit is positive.
  void validate() const;
};

struct MemoryPolicy {
  bool enabled = false;
  int max_turns = 5;
};

/// Prior question/answer turns of one conversation.
class ConversationMemory {
 public:
  void add(std::string question, std::string answer);
  /// `Question: ..\nFinal Answer: ..` pairs, newest last, at most
  /// policy.max_turns of them; empty when the policy is disabled.
  std::string render(const MemoryPolicy& policy) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::pair<std::string, std::string>> turns_;
};

enum class RunOutcome { Finished, MaxIterations, Timeout, ParseFailure, BackendError, Truncated };

std::string to_string(RunOutcome o);

inline constexpr std::string_view kStopSequence = "\nObservation:";
inline constexpr std::string_view kCorrectiveObservation =
    "invalid format; follow the Thought/Action/Action Input format or give a Final Answer.";

struct AgentRun {
  RunOutcome outcome = RunOutcome::Finished;
  std::string final_answer;
  AgentTrace trace;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool tokens_approximated = false;
  int backend_calls = 0;
  std::string error;  // backend error text, timeout or parse reason
  std::vector<std::string> artifacts;
};

struct AgentOptions {
  AgentLimits limits;
  MemoryPolicy memory;
  /// Used only when memory.enabled.
  std::string memory_text;
  /// Called for each event as it is appended to the trace.
  std::function<void(const AgentEvent&)> on_event;
  /// Called with every prompt sent to the backend.
  std::function<void(const std::string&)> on_prompt;
};

/// The ReAct loop. Never throws for backend, tool or parse problems; those
/// end up in the outcome. Throws std::invalid_argument for an empty registry,
/// an empty question or invalid limits.
AgentRun run_agent(llm::CompletionBackend& backend, const tools::ToolRegistry& registry, tools::ToolContext& ctx,
                   std::string_view question, const AgentOptions& options = {});

}  // namespace aiops::agent
