#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/domain/types.hpp"
#include "aiops/sim/cluster.hpp"

namespace aiops::tools {

class RagCorpus;

enum class PlotFormat { Png, Svg };

std::string extension(PlotFormat f);
PlotFormat parse_plot_format(std::string_view text);

/// What a tool produced. `content` is the Observation text the agent sees;
/// errors are reported the same way so the agent can recover.
struct ToolResult {
  std::string content;
  std::optional<nlohmann::json> structured;
  std::vector<std::string> artifacts;
  bool is_error = false;

  static ToolResult error(std::string message) {
    ToolResult r;
    r.content = "Error: " + std::move(message);
    r.is_error = true;
    return r;
  }
};

/// Everything a tool may read. One context per agent run; the SimState and
/// corpus are shared, the clock is owned by the run.
struct ToolContext {
  const sim::SimState& state;
  sim::Clock& clock;
  const RagCorpus& corpus;
  PlotFormat plot_format = PlotFormat::Png;
  std::uint64_t seed = 0;
};

/// Thrown by handlers for bad arguments or missing data; the registry turns
/// it into an error ToolResult.
class ToolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ToolHandler = std::function<ToolResult(const nlohmann::json& args, ToolContext& ctx)>;

struct Tool {
  ToolSpec spec;
  ToolHandler handler;
};

struct RegistryRender {
  std::string tools_block;
  std::string tool_names_block;
};

/// One line per tool `<action_name>: <description> Args: <fields>`, plus the
/// comma-separated action names. Throws std::invalid_argument on an empty
/// list, an invalid action name or a duplicate.
RegistryRender render_registry(const std::vector<ToolSpec>& specs);

class ToolRegistry {
 public:
  ToolRegistry() = default;
  explicit ToolRegistry(std::vector<Tool> tools);

  /// Throws std::invalid_argument on a duplicate or malformed action name.
  void add(Tool tool);

  const Tool* find(std::string_view action_name) const;
  const Tool* find(ToolId id) const;
  std::vector<ToolSpec> specs() const;
  std::size_t size() const { return tools_.size(); }
  bool empty() const { return tools_.empty(); }
  RegistryRender render() const { return render_registry(specs()); }

  /// Parses `input_text` against the tool's fields and runs it. Never throws
  /// for agent-caused problems: unknown tools, malformed input and handler
  /// failures all come back as error results.
  ToolResult invoke(std::string_view action_name, std::string_view input_text, ToolContext& ctx) const;

 private:
  std::vector<Tool> tools_;
};

/// Coerces an Action Input line to a JSON object for `spec`. Accepts a JSON
/// object, or a bare string when the tool has exactly one required string
/// field. Numeric fields also accept numeric strings. Throws ToolError.
nlohmann::json parse_tool_input(const ToolSpec& spec, std::string_view input_text);

/// The nine operations tools in T1..T9 order.
ToolRegistry default_registry();

}  // namespace aiops::tools
