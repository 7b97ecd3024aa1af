#include "aiops/tools/registry.hpp"

#include <cmath>
#include <set>

#include "aiops/util/text.hpp"

namespace aiops::tools {

std::string extension(PlotFormat f) { return f == PlotFormat::Png ? "png" : "svg"; }

PlotFormat parse_plot_format(std::string_view text) {
  if (text == "png") return PlotFormat::Png;
  if (text == "svg") return PlotFormat::Svg;
  throw std::invalid_argument("invalid plot format '" + std::string(text) + "' (png or svg)");
}

RegistryRender render_registry(const std::vector<ToolSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("tool registry is empty");
  std::set<std::string> seen;
  RegistryRender out;
  std::vector<std::string> names;
  for (const auto& spec : specs) {
    if (!is_valid_action_name(spec.action_name)) {
      throw std::invalid_argument("invalid action name '" + spec.action_name + "'");
    }
    if (!seen.insert(spec.action_name).second) {
      throw std::invalid_argument("duplicate action name '" + spec.action_name + "'");
    }
    std::vector<std::string> fields;
    for (const auto& f : spec.inputs) {
      fields.push_back(f.name + " (" + to_string(f.kind) + ", " + (f.required ? "required" : "optional") + ")");
    }
    if (!out.tools_block.empty()) out.tools_block += "\n";
    out.tools_block += spec.action_name + ": " + spec.description +
                       " Args: " + (fields.empty() ? std::string("none") : text::join(fields, ", "));
    names.push_back(spec.action_name);
  }
  out.tool_names_block = text::join(names, ", ");
  return out;
}

ToolRegistry::ToolRegistry(std::vector<Tool> tools) {
  for (auto& t : tools) add(std::move(t));
}

void ToolRegistry::add(Tool tool) {
  if (!is_valid_action_name(tool.spec.action_name)) {
    throw std::invalid_argument("invalid action name '" + tool.spec.action_name + "'");
  }
  if (find(tool.spec.action_name)) {
    throw std::invalid_argument("duplicate action name '" + tool.spec.action_name + "'");
  }
  tools_.push_back(std::move(tool));
}

const Tool* ToolRegistry::find(std::string_view action_name) const {
  for (const auto& t : tools_) {
    if (t.spec.action_name == action_name) return &t;
  }
  return nullptr;
}

const Tool* ToolRegistry::find(ToolId id) const {
  for (const auto& t : tools_) {
    if (t.spec.tool_id == id) return &t;
  }
  return nullptr;
}

std::vector<ToolSpec> ToolRegistry::specs() const {
  std::vector<ToolSpec> out;
  out.reserve(tools_.size());
  for (const auto& t : tools_) out.push_back(t.spec);
  return out;
}

namespace {

std::string_view strip_fences(std::string_view s) {
  s = text::trim(s);
  if (text::starts_with(s, "```")) {
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
    const auto close = s.rfind("```");
    if (close != std::string_view::npos) s = s.substr(0, close);
    s = text::trim(s);
  }
  return s;
}

nlohmann::json coerce(const InputField& field, const nlohmann::json& value) {
  const auto bad = [&](const std::string& expected) {
    return ToolError("field '" + field.name + "' must be " + expected + ", got " + value.dump());
  };
  switch (field.kind) {
    case FieldKind::String:
      if (value.is_string()) return value;
      if (value.is_number_integer()) return std::to_string(value.get<long long>());
      if (value.is_number()) return text::shortest(value.get<double>());
      throw bad("a string");
    case FieldKind::Number:
      if (value.is_number()) return value;
      if (value.is_string()) {
        if (auto v = text::parse_double(value.get<std::string>())) return *v;
      }
      throw bad("a number");
    case FieldKind::Integer: {
      if (value.is_number_integer()) return value;
      std::optional<double> v;
      if (value.is_number()) v = value.get<double>();
      if (value.is_string()) v = text::parse_double(value.get<std::string>());
      if (v && std::floor(*v) == *v && std::abs(*v) < 9e15) return static_cast<long long>(*v);
      throw bad("an integer");
    }
    case FieldKind::Flag: {
      if (value.is_boolean()) return value.get<bool>() ? 1 : 0;
      if (value.is_number_integer() && (value.get<long long>() == 0 || value.get<long long>() == 1)) return value;
      if (value.is_string()) {
        const auto s = text::to_lower(text::trim(value.get<std::string>()));
        if (s == "1" || s == "true") return 1;
        if (s == "0" || s == "false") return 0;
      }
      throw bad("0 or 1");
    }
  }
  return value;
}

}  // namespace

nlohmann::json parse_tool_input(const ToolSpec& spec, std::string_view input_text) {
  const auto body = strip_fences(input_text);
  nlohmann::json args;
  if (!body.empty() && body.front() == '{') {
    try {
      args = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      throw ToolError("Action Input is not valid JSON");
    }
  } else {
    std::vector<const InputField*> required_strings;
    std::size_t required = 0;
    for (const auto& f : spec.inputs) {
      if (!f.required) continue;
      ++required;
      if (f.kind == FieldKind::String) required_strings.push_back(&f);
    }
    if (required != 1 || required_strings.size() != 1) {
      std::vector<std::string> names;
      for (const auto& f : spec.inputs) names.push_back(f.name);
      throw ToolError("Action Input must be a JSON object with fields: " + text::join(names, ", "));
    }
    auto value = std::string(body);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    args = nlohmann::json::object();
    args[required_strings.front()->name] = value;
  }
  if (!args.is_object()) throw ToolError("Action Input must be a JSON object");
  for (const auto& f : spec.inputs) {
    if (!args.contains(f.name) || args[f.name].is_null()) {
      if (f.required) throw ToolError("missing required field '" + f.name + "'");
      args.erase(f.name);
      continue;
    }
    args[f.name] = coerce(f, args[f.name]);
  }
  return args;
}

ToolResult ToolRegistry::invoke(std::string_view action_name, std::string_view input_text, ToolContext& ctx) const {
  const auto* tool = find(action_name);
  if (!tool) {
    std::vector<std::string> names;
    for (const auto& t : tools_) names.push_back(t.spec.action_name);
    return ToolResult::error(std::string(action_name) + " is not a valid tool, try one of [" +
                             text::join(names, ", ") + "].");
  }
  try {
    auto args = parse_tool_input(tool->spec, input_text);
    auto result = tool->handler(args, ctx);
    if (result.content.empty()) result.content = "(no output)";
    return result;
  } catch (const ToolError& e) {
    return ToolResult::error(e.what());
  } catch (const std::exception& e) {
    return ToolResult::error(std::string("tool failed: ") + e.what());
  }
}

}  // namespace aiops::tools
