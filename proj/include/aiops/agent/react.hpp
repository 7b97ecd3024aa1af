#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "aiops/domain/types.hpp"
#include "aiops/tools/registry.hpp"

namespace aiops::agent {

/// The bundled ReAct prompt template with its four placeholders.
std::string_view prompt_template();

/// Substitutes {tools}, {tool_names}, {input} and {agent_scratchpad}.
/// `memory_text` (prior Question/Final Answer pairs) goes right before
/// "Begin!". Throws std::invalid_argument for an empty question.
std::string build_prompt(const tools::RegistryRender& tools, std::string_view question, std::string_view scratchpad,
                         std::string_view memory_text = {});

/// Prompt for a run in progress: the scratchpad continues the template's
/// trailing "Thought:" and ends with a fresh "Thought:".
std::string build_prompt(const tools::RegistryRender& tools, std::string_view question, const AgentTrace& trace,
                         std::string_view memory_text = {});

struct ToolCall {
  std::string thought;
  std::string action_name;
  std::string input_text;
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct Finish {
  std::string thought;
  std::string final_answer;
  friend bool operator==(const Finish&, const Finish&) = default;
};

struct Malformed {
  std::string raw;
  std::string reason;
  friend bool operator==(const Malformed&, const Malformed&) = default;
};

using ParsedStep = std::variant<ToolCall, Finish, Malformed>;

/// Markers are recognised at the start of a line. The Action Input runs to a
/// blank line, a line starting with another marker, or the end.
ParsedStep parse_step(std::string_view completion);

/// `Thought: ..`, `Action: ..`, `Action Input: ..`, `Observation: ..` lines in
/// trace order. Throws std::invalid_argument for a malformed trace.
std::string render_scratchpad(const AgentTrace& trace);

}  // namespace aiops::agent
