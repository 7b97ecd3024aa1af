#include "aiops/agent/runner.hpp"

#include <chrono>
#include <stdexcept>

namespace aiops::agent {

void AgentLimits::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (max_output_chars < 1) throw std::invalid_argument("max_output_chars must be positive");
  if (!(wall_timeout_s > 0)) throw std::invalid_argument("wall_timeout_s must be positive");
  if (malformed_retry_budget < 0) throw std::invalid_argument("malformed_retry_budget must not be negative");
}

void ConversationMemory::add(std::string question, std::string answer) {
  std::lock_guard lock(mu_);
  turns_.emplace_back(std::move(question), std::move(answer));
  while (turns_.size() > 64) turns_.pop_front();
}

std::string ConversationMemory::render(const MemoryPolicy& policy) const {
  if (!policy.enabled || policy.max_turns < 1) return {};
  std::lock_guard lock(mu_);
  const auto n = std::min<std::size_t>(turns_.size(), static_cast<std::size_t>(policy.max_turns));
  std::string out;
  for (auto i = turns_.size() - n; i < turns_.size(); ++i) {
    out += "Question: " + turns_[i].first + "\nFinal Answer: " + turns_[i].second + "\n\n";
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::size_t ConversationMemory::size() const {
  std::lock_guard lock(mu_);
  return turns_.size();
}

std::string to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::Finished: return "finished";
    case RunOutcome::MaxIterations: return "max_iterations";
    case RunOutcome::Timeout: return "timeout";
    case RunOutcome::ParseFailure: return "parse_failure";
    case RunOutcome::BackendError: return "backend_error";
    case RunOutcome::Truncated: return "truncated";
  }
  return "finished";
}

AgentRun run_agent(llm::CompletionBackend& backend, const tools::ToolRegistry& registry, tools::ToolContext& ctx,
                   std::string_view question, const AgentOptions& options) {
  if (registry.empty()) throw std::invalid_argument("tool registry is empty");
  options.limits.validate();
  const auto rendered = registry.render();
  const auto memory = options.memory.enabled ? std::string_view(options.memory_text) : std::string_view{};
  // Validates the question before any backend call.
  (void)build_prompt(rendered, question, std::string_view{}, memory);

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  AgentRun run;
  const auto push = [&](AgentEvent ev) {
    run.trace.push_back(std::move(ev));
    if (options.on_event) options.on_event(run.trace.back());
  };

  int retries_left = options.limits.malformed_retry_budget;
  for (int iteration = 0;; ++iteration) {
    if (iteration >= options.limits.max_iterations) {
      run.outcome = RunOutcome::MaxIterations;
      run.error = "reached " + std::to_string(options.limits.max_iterations) + " iterations";
      return run;
    }
    if (elapsed() > options.limits.wall_timeout_s) {
      run.outcome = RunOutcome::Timeout;
      run.error = "wall clock limit exceeded";
      return run;
    }

    llm::CompletionRequest request;
    request.prompt = build_prompt(rendered, question, run.trace, memory);
    request.stop_sequences = {std::string(kStopSequence)};
    request.max_output_chars = options.limits.max_output_chars;
    if (options.on_prompt) options.on_prompt(request.prompt);

    llm::CompletionResponse response;
    try {
      response = backend.complete(request);
    } catch (const llm::BackendError& e) {
      run.outcome = RunOutcome::BackendError;
      run.error = e.what();
      return run;
    }
    ++run.backend_calls;
    run.prompt_tokens += response.prompt_tokens;
    run.completion_tokens += response.completion_tokens;
    if (response.token_source == llm::TokenSource::Approximated) run.tokens_approximated = true;

    bool truncated = response.finish_reason == "length";
    if (response.text.size() >= options.limits.max_output_chars) {
      response.text.resize(options.limits.max_output_chars);
      truncated = true;
    }
    // Backends that ignore stop sequences must not smuggle in observations.
    llm::apply_stop_sequences(response.text, request.stop_sequences);

    if (elapsed() > options.limits.wall_timeout_s) {
      run.outcome = RunOutcome::Timeout;
      run.error = "wall clock limit exceeded";
      return run;
    }

    auto step = parse_step(response.text);
    if (auto* call = std::get_if<ToolCall>(&step)) {
      push(Thought{call->thought});
      push(Action{call->action_name, call->input_text});
      auto result = registry.invoke(call->action_name, call->input_text, ctx);
      for (auto& a : result.artifacts) run.artifacts.push_back(a);
      push(Observation{std::move(result.content)});
      continue;
    }
    if (auto* fin = std::get_if<Finish>(&step)) {
      push(Thought{fin->thought});
      push(FinalAnswer{fin->final_answer});
      run.final_answer = fin->final_answer;
      run.outcome = RunOutcome::Finished;
      return run;
    }
    const auto& bad = std::get<Malformed>(step);
    push(Thought{bad.raw});
    if (truncated) {
      run.outcome = RunOutcome::Truncated;
      run.error = "completion truncated at " + std::to_string(response.text.size()) + " characters";
      return run;
    }
    if (retries_left-- <= 0) {
      run.outcome = RunOutcome::ParseFailure;
      run.error = bad.reason;
      return run;
    }
    push(Observation{std::string(kCorrectiveObservation)});
  }
}

}  // namespace aiops::agent
