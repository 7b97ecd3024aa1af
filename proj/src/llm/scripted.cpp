#include "aiops/llm/scripted.hpp"

#include <yaml-cpp/yaml.h>

#include <stdexcept>

#include "aiops/util/text.hpp"

namespace aiops::llm {

namespace {

std::string_view between(std::string_view s, std::string_view open, std::string_view close, std::size_t from = 0) {
  const auto b = s.find(open, from);
  if (b == std::string_view::npos) return {};
  const auto start = b + open.size();
  const auto e = s.find(close, start);
  return s.substr(start, e == std::string_view::npos ? std::string_view::npos : e - start);
}

}  // namespace

PromptView parse_prompt(std::string_view prompt) {
  PromptView v;
  const auto tools = between(prompt, "You have access to the following tools:\n\n", "\n\nUse the following format:");
  for (auto line : text::split_lines(tools)) {
    const auto colon = line.find(": ");
    if (colon == std::string_view::npos) continue;
    auto desc = line.substr(colon + 2);
    if (const auto args = desc.rfind(" Args: "); args != std::string_view::npos) desc = desc.substr(0, args);
    v.tool_descriptions[std::string(line.substr(0, colon))] = std::string(desc);
  }
  const auto names = between(prompt, "should be one of \n[", "]\n");
  std::size_t pos = 0;
  while (pos < names.size()) {
    auto comma = names.find(", ", pos);
    if (comma == std::string_view::npos) comma = names.size();
    if (comma > pos) v.tool_names.emplace_back(names.substr(pos, comma - pos));
    pos = comma + 2;
  }

  const auto begin = prompt.rfind("Begin!\n\nQuestion: ");
  if (begin == std::string_view::npos) return v;
  const auto format_end = prompt.find("original input \nquestion\n\n");
  if (format_end != std::string_view::npos && format_end < begin) {
    const auto mem_start = format_end + 26;
    v.memory = std::string(text::trim(prompt.substr(mem_start, begin - mem_start)));
  }
  const auto q_start = begin + 18;
  const auto q_end = prompt.find("\nThought:", q_start);
  if (q_end == std::string_view::npos) {
    v.question = std::string(prompt.substr(q_start));
    return v;
  }
  v.question = std::string(prompt.substr(q_start, q_end - q_start));

  enum class Mode { None, Input, Observation } mode = Mode::None;
  std::optional<PromptTurn> pending;
  for (auto line : text::split_lines(prompt.substr(q_end + 9))) {
    if (text::starts_with(line, "Action: ")) {
      pending = PromptTurn{std::string(text::trim(line.substr(8))), {}, {}};
      mode = Mode::None;
    } else if (text::starts_with(line, "Action Input:") && pending) {
      pending->input = std::string(text::trim(line.substr(13)));
      mode = Mode::Input;
    } else if (text::starts_with(line, "Observation:")) {
      auto turn = pending.value_or(PromptTurn{});
      pending.reset();
      auto rest = line.substr(12);
      if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      turn.observation = std::string(rest);
      v.turns.push_back(std::move(turn));
      mode = Mode::Observation;
    } else if (text::starts_with(line, "Thought:")) {
      mode = Mode::None;
    } else if (mode == Mode::Input && pending) {
      pending->input += "\n" + std::string(line);
    } else if (mode == Mode::Observation) {
      v.turns.back().observation += "\n" + std::string(line);
    }
  }
  // The line break before the next "Thought:" belongs to the scratchpad layout.
  for (auto& t : v.turns) {
    while (!t.observation.empty() && t.observation.back() == '\n') t.observation.pop_back();
  }
  return v;
}

std::string to_string(FaultKind k) {
  switch (k) {
    case FaultKind::HallucinateDates: return "hallucinate_dates";
    case FaultKind::Deflect: return "deflect";
    case FaultKind::FlawedOrder: return "flawed_order";
    case FaultKind::Truncate: return "truncate";
    case FaultKind::Stall: return "stall";
  }
  return "deflect";
}

FaultKind parse_fault_kind(std::string_view text) {
  for (auto k : {FaultKind::HallucinateDates, FaultKind::Deflect, FaultKind::FlawedOrder, FaultKind::Truncate,
                 FaultKind::Stall}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown fault kind '" + std::string(text) +
                              "' (hallucinate_dates, deflect, flawed_order, truncate or stall)");
}

FailureKind expected_failure_kind(FaultKind k) {
  switch (k) {
    case FaultKind::HallucinateDates: return FailureKind::ToolMisuse;
    case FaultKind::Deflect: return FailureKind::Deflection;
    case FaultKind::FlawedOrder: return FailureKind::FlawedReasoning;
    case FaultKind::Truncate: return FailureKind::Truncation;
    case FaultKind::Stall: return FailureKind::Timeout;
  }
  return FailureKind::None;
}

std::string_view fault_target_query(FaultKind k) { return k == FaultKind::Truncate ? "Q-25" : "Q-24"; }

std::string Behavior::describe() const {
  switch (kind) {
    case Kind::Golden: return "golden";
    case Kind::Replay: return "replay(" + std::to_string(replay.size()) + ")";
    case Kind::Fault: return "fault:" + to_string(fault);
  }
  return "golden";
}

ScriptedBackend::ScriptedBackend(std::string id, Behavior fallback, std::map<std::string, Behavior> by_question)
    : id_(std::move(id)), fallback_(std::move(fallback)), by_question_(std::move(by_question)) {
  const auto check = [](const Behavior& b) {
    if (b.kind == Behavior::Kind::Replay && b.replay.empty()) {
      throw std::invalid_argument("replay behavior needs at least one completion");
    }
  };
  check(fallback_);
  for (const auto& [q, b] : by_question_) check(b);
}

const Behavior& ScriptedBackend::behavior_for(const std::string& question) const {
  const auto it = by_question_.find(question);
  return it == by_question_.end() ? fallback_ : it->second;
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
  const auto view = parse_prompt(request.prompt);
  const auto& behavior = behavior_for(view.question);
  ScriptedStep step;
  switch (behavior.kind) {
    case Behavior::Kind::Golden: step = golden_step(view); break;
    case Behavior::Kind::Fault: step = fault_step(behavior.fault, view); break;
    case Behavior::Kind::Replay:
      step.text = behavior.replay[std::min(view.observations(), behavior.replay.size() - 1)];
      break;
  }
  CompletionResponse r;
  r.text = std::move(step.text);
  apply_stop_sequences(r.text, request.stop_sequences);
  if (step.cut || r.text.size() > request.max_output_chars) {
    if (r.text.size() > request.max_output_chars) r.text.resize(request.max_output_chars);
    r.finish_reason = "length";
  }
  r.prompt_tokens = approx_tokens(request.prompt);
  r.completion_tokens = approx_tokens(r.text);
  r.token_source = TokenSource::Approximated;
  return r;
}

bool is_scripted_id(std::string_view id) { return text::starts_with(id, "scripted:"); }

ScriptedBackend make_scripted(std::string_view id) {
  if (id == "scripted:golden") return ScriptedBackend(std::string(id));
  if (text::starts_with(id, "scripted:fault:")) {
    return ScriptedBackend(std::string(id), Behavior::fault_of(parse_fault_kind(id.substr(15))));
  }
  throw std::invalid_argument("unknown scripted backend '" + std::string(id) +
                              "' (scripted:golden or scripted:fault:<kind>)");
}

namespace {

Behavior behavior_from(const YAML::Node& node) {
  if (node.IsScalar()) {
    if (node.Scalar() == "golden") return Behavior::golden();
    throw std::invalid_argument("unknown behavior '" + node.Scalar() + "'");
  }
  if (!node.IsMap() || node.size() != 1) throw std::invalid_argument("behavior must be golden, {fault: ..} or {replay: [..]}");
  if (node["fault"]) return Behavior::fault_of(parse_fault_kind(node["fault"].as<std::string>()));
  if (node["replay"]) {
    if (!node["replay"].IsSequence()) throw std::invalid_argument("replay must be a list of completions");
    std::vector<std::string> items;
    for (const auto& item : node["replay"]) items.push_back(item.as<std::string>());
    if (items.empty()) throw std::invalid_argument("replay list is empty");
    return Behavior::replay_of(std::move(items));
  }
  throw std::invalid_argument("behavior must be golden, {fault: ..} or {replay: [..]}");
}

}  // namespace

ScriptedBackend load_policy_pack(std::string_view yaml_text, const std::vector<QueryCase>& suite) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("policy pack: ") + e.what());
  }
  if (!root.IsMap()) throw std::invalid_argument("policy pack must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "policy_id" && key != "default" && key != "queries") {
      throw std::invalid_argument("policy pack: unknown key '" + key + "'");
    }
  }
  if (!root["policy_id"]) throw std::invalid_argument("policy pack: missing policy_id");
  const auto id = root["policy_id"].as<std::string>();
  try {
    const auto fallback = root["default"] ? behavior_from(root["default"]) : Behavior::golden();
    std::map<std::string, Behavior> by_question;
    if (root["queries"]) {
      if (!root["queries"].IsMap()) throw std::invalid_argument("queries must be a mapping");
      for (const auto& kv : root["queries"]) {
        const auto qid = kv.first.as<std::string>();
        const QueryCase* found = nullptr;
        for (const auto& q : suite) {
          if (q.id == qid) found = &q;
        }
        if (!found) throw std::invalid_argument("unknown query id '" + qid + "'");
        by_question[found->text] = behavior_from(kv.second);
      }
    }
    return ScriptedBackend(id, fallback, std::move(by_question));
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument("policy pack " + id + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("policy pack " + id + ": " + e.what());
  }
}

}  // namespace aiops::llm
