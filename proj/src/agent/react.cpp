#include "aiops/agent/react.hpp"

#include <array>
#include <optional>
#include <stdexcept>

#include "aiops/resources.hpp"
#include "aiops/util/text.hpp"

namespace aiops::agent {

std::string_view prompt_template() { return resources::require("prompts/react_template.txt"); }

namespace {

// Replaces each placeholder present in `segment` in order of appearance;
// substituted text is never rescanned.
std::string substitute(std::string_view segment,
                       std::initializer_list<std::pair<std::string_view, std::string_view>> subs) {
  std::string out;
  std::size_t from = 0;
  for (const auto& [key, value] : subs) {
    const auto pos = segment.find(key, from);
    if (pos == std::string_view::npos) throw std::logic_error("prompt template lacks " + std::string(key));
    out.append(segment, from, pos - from);
    out += value;
    from = pos + key.size();
  }
  out.append(segment, from);
  return out;
}

}  // namespace

std::string build_prompt(const tools::RegistryRender& tools, std::string_view question, std::string_view scratchpad,
                         std::string_view memory_text) {
  if (text::trim(question).empty()) throw std::invalid_argument("question must not be empty");
  const auto tpl = prompt_template();
  const auto begin = tpl.find("Begin!");
  if (begin == std::string_view::npos) throw std::logic_error("prompt template lacks Begin!");
  auto out = substitute(tpl.substr(0, begin), {{"{tools}", tools.tools_block}, {"{tool_names}", tools.tool_names_block}});
  if (!memory_text.empty()) {
    std::string block(memory_text);
    while (!block.empty() && block.back() == '\n') block.pop_back();
    out += block + "\n\n";
  }
  out += substitute(tpl.substr(begin), {{"{input}", question}, {"{agent_scratchpad}", scratchpad}});
  return out;
}

std::string build_prompt(const tools::RegistryRender& tools, std::string_view question, const AgentTrace& trace,
                         std::string_view memory_text) {
  std::string pad;
  if (!trace.empty()) {
    pad = render_scratchpad(trace);
    if (text::starts_with(pad, "Thought:")) pad.erase(0, 8);
    pad += "Thought:";
  }
  return build_prompt(tools, question, pad, memory_text);
}

namespace {

constexpr std::array<std::string_view, 5> kMarkers{"Thought:", "Action:", "Action Input:", "Observation:",
                                                   "Final Answer:"};

struct Line {
  std::string_view text;
  std::size_t offset;
};

std::vector<Line> lines_of(std::string_view s) {
  std::vector<Line> out;
  std::size_t offset = 0;
  for (auto l : text::split_lines(s)) {
    out.push_back({l, offset});
    offset += l.size() + 1;
  }
  return out;
}

std::optional<std::string_view> after_marker(std::string_view line, std::string_view marker) {
  auto t = line;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  if (!text::starts_with(t, marker)) return std::nullopt;
  return t.substr(marker.size());
}

bool is_marker_line(std::string_view line) {
  for (auto m : kMarkers) {
    if (after_marker(line, m)) return true;
  }
  return false;
}

std::string thought_before(std::string_view completion, std::size_t end) {
  auto t = text::trim(completion.substr(0, end));
  if (text::starts_with(t, "Thought:")) t = text::trim(t.substr(8));
  return std::string(t);
}

}  // namespace

ParsedStep parse_step(std::string_view completion) {
  const auto lines = lines_of(completion);
  std::optional<std::size_t> final_idx, action_idx;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!final_idx && after_marker(lines[i].text, "Final Answer:")) final_idx = i;
    if (!action_idx && after_marker(lines[i].text, "Action:")) action_idx = i;
  }
  if (final_idx && (!action_idx || *final_idx < *action_idx)) {
    const auto& line = lines[*final_idx];
    const auto start = line.offset + (line.text.size() - after_marker(line.text, "Final Answer:")->size());
    return Finish{thought_before(completion, line.offset), std::string(text::trim(completion.substr(start)))};
  }
  if (!action_idx) return Malformed{std::string(completion), "no Action or Final Answer marker"};

  const auto name = std::string(text::trim(*after_marker(lines[*action_idx].text, "Action:")));
  if (name.empty()) return Malformed{std::string(completion), "empty action name"};
  std::optional<std::size_t> input_idx;
  for (auto i = *action_idx + 1; i < lines.size(); ++i) {
    if (after_marker(lines[i].text, "Action Input:")) {
      input_idx = i;
      break;
    }
    if (!text::trim(lines[i].text).empty()) break;
  }
  if (!input_idx) return Malformed{std::string(completion), "Action without Action Input"};

  std::string input(text::trim(*after_marker(lines[*input_idx].text, "Action Input:")));
  for (auto i = *input_idx + 1; i < lines.size(); ++i) {
    const auto l = lines[i].text;
    if (text::trim(l).empty() || is_marker_line(l)) break;
    input += "\n";
    input += l;
  }
  while (!input.empty() && (input.back() == ' ' || input.back() == '\t' || input.back() == '\r')) input.pop_back();
  return ToolCall{thought_before(completion, lines[*action_idx].offset), name, std::move(input)};
}

std::string render_scratchpad(const AgentTrace& trace) {
  if (auto v = trace_violation(trace)) throw std::invalid_argument("invalid trace: " + *v);
  std::string out;
  for (const auto& ev : trace) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, Thought>) {
            out += "Thought: " + e.text + "\n";
          } else if constexpr (std::is_same_v<T, Action>) {
            out += "Action: " + e.action_name + "\nAction Input: " + e.input_text + "\n";
          } else if constexpr (std::is_same_v<T, Observation>) {
            out += "Observation: " + e.text + "\n";
          } else {
            out += "Final Answer: " + e.text + "\n";
          }
        },
        ev);
  }
  return out;
}

}  // namespace aiops::agent
