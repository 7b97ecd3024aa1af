#include "aiops/domain/types.hpp"

#include <array>

namespace aiops {

std::string to_string(ToolId id) { return "T" + std::to_string(static_cast<int>(id)); }

ToolId parse_tool_id(std::string_view text) {
  if (text.size() == 2 && text[0] == 'T' && text[1] >= '1' && text[1] <= '9') {
    return static_cast<ToolId>(text[1] - '0');
  }
  throw std::invalid_argument("invalid tool id '" + std::string(text) + "' (expected T1..T9)");
}

std::string to_string(Category c) { return c == Category::SR ? "SR" : "AR"; }

Category parse_category(std::string_view text) {
  if (text == "SR") return Category::SR;
  if (text == "AR") return Category::AR;
  throw std::invalid_argument("invalid category '" + std::string(text) + "' (expected SR or AR)");
}

std::string to_string(FieldKind k) {
  switch (k) {
    case FieldKind::String: return "string";
    case FieldKind::Number: return "number";
    case FieldKind::Integer: return "integer";
    case FieldKind::Flag: return "flag";
  }
  return "string";
}

bool is_valid_action_name(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  for (char c : name) {
    if (!alpha(c) && !digit(c) && c != '_') return false;
  }
  return true;
}

std::optional<std::string> trace_violation(const AgentTrace& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (std::holds_alternative<Action>(trace[i])) {
      if (i + 1 >= trace.size() || !std::holds_alternative<Observation>(trace[i + 1])) {
        return "event " + std::to_string(i) + ": Action is not followed by an Observation";
      }
    }
    if (std::holds_alternative<FinalAnswer>(trace[i]) && i + 1 != trace.size()) {
      return "event " + std::to_string(i) + ": FinalAnswer is not the last event";
    }
  }
  return std::nullopt;
}

std::vector<std::string> action_sequence(const AgentTrace& trace) {
  std::vector<std::string> out;
  for (const auto& ev : trace) {
    if (const auto* a = std::get_if<Action>(&ev)) out.push_back(a->action_name);
  }
  return out;
}

std::string to_string(FailureKind k) {
  switch (k) {
    case FailureKind::None: return "none";
    case FailureKind::Hallucination: return "hallucination";
    case FailureKind::Deflection: return "deflection";
    case FailureKind::FlawedReasoning: return "flawed_reasoning";
    case FailureKind::Truncation: return "truncation";
    case FailureKind::ToolMisuse: return "tool_misuse";
    case FailureKind::Timeout: return "timeout";
    case FailureKind::ParseError: return "parse_error";
    case FailureKind::BackendError: return "backend_error";
  }
  return "none";
}

const ReportCell* BenchmarkReport::cell(std::string_view query_id, std::string_view backend_id) const {
  for (const auto& c : cells) {
    if (c.query_id == query_id && c.backend_id == backend_id) return &c;
  }
  return nullptr;
}

std::string to_string(PodPhase p) {
  switch (p) {
    case PodPhase::Running: return "Running";
    case PodPhase::Succeeded: return "Succeeded";
    case PodPhase::Pending: return "Pending";
    case PodPhase::Failed: return "Failed";
  }
  return "Running";
}

PodPhase parse_pod_phase(std::string_view text) {
  constexpr std::array kPhases{PodPhase::Running, PodPhase::Succeeded, PodPhase::Pending, PodPhase::Failed};
  for (auto p : kPhases) {
    if (to_string(p) == text) return p;
  }
  throw std::invalid_argument("invalid pod phase '" + std::string(text) + "'");
}

std::string to_string(Protocol p) { return p == Protocol::TCP ? "TCP" : "UDP"; }

Protocol parse_protocol(std::string_view text) {
  if (text == "TCP") return Protocol::TCP;
  if (text == "UDP") return Protocol::UDP;
  throw std::invalid_argument("invalid protocol '" + std::string(text) + "' (expected TCP or UDP)");
}

const Namespace* ClusterFixture::find_namespace(std::string_view name) const {
  for (const auto& ns : namespaces) {
    if (ns.name == name) return &ns;
  }
  return nullptr;
}

}  // namespace aiops
