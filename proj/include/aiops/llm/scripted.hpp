#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/domain/types.hpp"
#include "aiops/llm/backend.hpp"

namespace aiops::llm {

/// One completed tool step as it appears in a prompt's scratchpad.
struct PromptTurn {
  std::string action;  // empty for a corrective observation
  std::string input;
  std::string observation;
};

/// What a scripted policy can read from a ReAct prompt.
struct PromptView {
  std::string question;
  std::string memory;  // prior Question/Final Answer pairs, if any
  std::vector<std::string> tool_names;
  std::map<std::string, std::string> tool_descriptions;
  std::vector<PromptTurn> turns;

  std::size_t observations() const { return turns.size(); }
};

PromptView parse_prompt(std::string_view prompt);

enum class FaultKind { HallucinateDates, Deflect, FlawedOrder, Truncate, Stall };

std::string to_string(FaultKind k);
/// Throws std::invalid_argument for unknown names.
FaultKind parse_fault_kind(std::string_view text);

/// The failure each fault is expected to produce on its target query.
FailureKind expected_failure_kind(FaultKind k);
/// Query on which the fault's failure mode is characteristic.
std::string_view fault_target_query(FaultKind k);

struct ScriptedStep {
  std::string text;
  bool cut = false;  // emitted as if the output limit was hit
};

/// Next correct ReAct step for the question in `view`. A pure function of
/// its input. With `skip_time_tool` it fabricates timestamps instead of
/// calling the time tool.
ScriptedStep golden_step(const PromptView& view, bool skip_time_tool = false);

ScriptedStep fault_step(FaultKind kind, const PromptView& view);

struct Behavior {
  enum class Kind { Golden, Replay, Fault };
  Kind kind = Kind::Golden;
  std::vector<std::string> replay;
  FaultKind fault = FaultKind::Deflect;

  static Behavior golden() { return {}; }
  static Behavior replay_of(std::vector<std::string> items) { return {Kind::Replay, std::move(items), {}}; }
  static Behavior fault_of(FaultKind k) { return {Kind::Fault, {}, k}; }
  std::string describe() const;
};

/// Deterministic stand-in for a model. Behaviours are chosen by question
/// text; unmatched questions use the default.
class ScriptedBackend : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::string id, Behavior fallback = Behavior::golden(),
                           std::map<std::string, Behavior> by_question = {});

  std::string id() const override { return id_; }
  CompletionResponse complete(const CompletionRequest& request) override;

  const Behavior& behavior_for(const std::string& question) const;

 private:
  std::string id_;
  Behavior fallback_;
  std::map<std::string, Behavior> by_question_;
};

/// "scripted:golden" or "scripted:fault:<kind>".
bool is_scripted_id(std::string_view id);
ScriptedBackend make_scripted(std::string_view id);

/// Policy pack:
///   policy_id: <id>
///   default: golden | {fault: <kind>} | {replay: [..]}
///   queries: {Q-xx: <behavior>, ...}
/// Query ids are mapped to question texts through `suite`. Throws
/// std::invalid_argument on malformed packs or unknown query ids.
ScriptedBackend load_policy_pack(std::string_view yaml_text, const std::vector<QueryCase>& suite);

}  // namespace aiops::llm
