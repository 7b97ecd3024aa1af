#include "aiops/eval/validator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <regex>
#include <set>

#include "aiops/sim/clock.hpp"
#include "aiops/util/text.hpp"

namespace aiops::eval {

namespace {

struct Reference {
  std::string kind;
  std::optional<std::string> ns;
  std::string selector;
  std::string field;
};

Reference parse_reference(std::string_view ref) {
  static const std::regex re(
      R"(^\$(operators|pods|running_pods|services|metrics|tools|clock)(?:@([A-Za-z0-9][A-Za-z0-9-]*))?\[([^\]]*)\](?:\.([a-z_]+))?$)");
  std::cmatch m;
  if (!std::regex_match(ref.data(), ref.data() + ref.size(), m, re)) {
    throw ValidatorConfigError("malformed reference '" + std::string(ref) + "'");
  }
  Reference r{m[1], std::nullopt, m[3], m[4]};
  if (m[2].matched) r.ns = m[2];
  return r;
}

bool selected(const std::string& selector, const std::string& name) {
  if (selector == "*") return true;
  if (!selector.empty() && selector.back() == '*') return text::starts_with(name, selector.substr(0, selector.size() - 1));
  return name == selector;
}

void add_unique(std::vector<std::string>& out, std::string v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
}

[[noreturn]] void bad_field(const std::string& ref, const std::string& field) {
  throw ValidatorConfigError("reference '" + ref + "': unknown field '" + field + "'");
}

std::vector<const Namespace*> namespaces_of(const Reference& r, const sim::SimState& state, const std::string& ref) {
  std::vector<const Namespace*> out;
  if (r.ns) {
    const auto* n = state.fixture().find_namespace(*r.ns);
    if (!n) throw ValidatorConfigError("reference '" + ref + "': unknown namespace '" + *r.ns + "'");
    out.push_back(n);
  } else {
    for (const auto& n : state.fixture().namespaces) out.push_back(&n);
  }
  return out;
}

}  // namespace

std::vector<std::string> resolve_reference(std::string_view ref_text, const sim::SimState& state,
                                           const tools::ToolRegistry& registry, double clock_reading) {
  const std::string ref(ref_text);
  const auto r = parse_reference(ref_text);
  std::vector<std::string> out;

  if (r.kind == "tools") {
    if (!r.field.empty() && r.field != "action_name") bad_field(ref, r.field);
    for (const auto& spec : registry.specs()) {
      if (selected(r.selector, spec.action_name)) add_unique(out, spec.action_name);
    }
  } else if (r.kind == "clock") {
    const auto offset = text::parse_double(r.selector);
    if (!offset) throw ValidatorConfigError("reference '" + ref + "': clock offset must be a number");
    const double ts = clock_reading + *offset;
    const auto& zone = state.timezone();
    if (r.field == "timestamp_int") {
      out.push_back(std::to_string(static_cast<long long>(std::floor(ts))));
    } else if (r.field == "iso_seconds") {
      out.push_back(sim::iso8601_seconds(ts, zone));
    } else if (r.field == "date") {
      out.push_back(sim::date_string(ts, zone));
    } else if (r.field == "weekday") {
      out.push_back(sim::weekday_name(sim::to_local(static_cast<std::int64_t>(std::floor(ts)), zone).weekday));
    } else {
      bad_field(ref, r.field);
    }
  } else {
    for (const auto* ns : namespaces_of(r, state, ref)) {
      if (r.kind == "operators") {
        for (const auto& op : ns->operators) {
          if (!selected(r.selector, op.name)) continue;
          if (r.field == "name") add_unique(out, op.name);
          else if (r.field == "version") add_unique(out, op.version);
          else if (r.field == "status") add_unique(out, op.status);
          else bad_field(ref, r.field);
        }
      } else if (r.kind == "pods") {
        for (const auto& pod : ns->pods) {
          if (!selected(r.selector, pod.name)) continue;
          if (r.field == "name") add_unique(out, pod.name);
          else if (r.field == "phase") add_unique(out, to_string(pod.phase));
          else bad_field(ref, r.field);
        }
      } else if (r.kind == "running_pods") {
        for (const auto& pod : ns->pods) {
          if (pod.phase != PodPhase::Running || !selected(r.selector, pod.name)) continue;
          if (r.field == "name") {
            add_unique(out, pod.name);
            continue;
          }
          if (r.field != "service" && r.field != "route" && r.field != "available_route") bad_field(ref, r.field);
          for (const auto& svc_name : pod.service_refs) {
            for (const auto& svc : ns->services) {
              if (svc.name != svc_name) continue;
              if (r.field == "service") add_unique(out, svc.name);
              else if (r.field == "route") add_unique(out, svc.route);
              else if (svc.route != kRouteUnavailable) add_unique(out, svc.route);
            }
          }
        }
      } else if (r.kind == "services") {
        for (const auto& svc : ns->services) {
          if (!selected(r.selector, svc.name)) continue;
          if (r.field == "name") add_unique(out, svc.name);
          else if (r.field == "route") add_unique(out, svc.route);
          else if (r.field == "port") {
            for (const auto& p : svc.ports) add_unique(out, std::to_string(p.port));
          } else bad_field(ref, r.field);
        }
      } else if (r.kind == "metrics") {
        if (r.field != "name") bad_field(ref, r.field);
        for (const auto& m : ns->metrics) {
          if (selected(r.selector, m.metric_name)) add_unique(out, m.metric_name);
        }
      }
    }
  }
  if (out.empty()) throw ValidatorConfigError("reference '" + ref + "' resolves to no values");
  return out;
}

namespace {

std::regex compile(const std::string& pattern, const std::string& query_id) {
  try {
    return std::regex(pattern);
  } catch (const std::regex_error& e) {
    throw ValidatorConfigError(query_id + ": invalid regex '" + pattern + "': " + e.what());
  }
}

std::string action_of(ToolId id, const tools::ToolRegistry& registry, const std::string& query_id) {
  const auto* tool = registry.find(id);
  if (!tool) throw ValidatorConfigError(query_id + ": tool " + to_string(id) + " is not in the registry");
  return tool->spec.action_name;
}

}  // namespace

void check_suite_references(const std::vector<QueryCase>& suite, const sim::SimState& state,
                            const tools::ToolRegistry& registry, double clock_reading) {
  for (const auto& q : suite) {
    const auto& v = q.validator;
    for (const auto& s : v.required_substrings) {
      if (s.empty() || s.front() != '$') continue;
      try {
        resolve_reference(s, state, registry, clock_reading);
      } catch (const ValidatorConfigError& e) {
        throw ValidatorConfigError(q.id + ": " + e.what());
      }
    }
    if (v.answer_regex) compile(*v.answer_regex, q.id);
    if (v.answer_lines_regex) compile(*v.answer_lines_regex, q.id);
    for (const auto& c : v.artifact_checks) compile(c.filename_regex, q.id);
    for (auto id : v.required_tools) action_of(id, registry, q.id);
    for (const auto& [a, b] : v.ordering) {
      action_of(a, registry, q.id);
      action_of(b, registry, q.id);
    }
  }
}

FailureKind failure_kind_for(agent::RunOutcome outcome) {
  switch (outcome) {
    case agent::RunOutcome::Finished: return FailureKind::None;
    case agent::RunOutcome::MaxIterations:
    case agent::RunOutcome::Timeout: return FailureKind::Timeout;
    case agent::RunOutcome::ParseFailure: return FailureKind::ParseError;
    case agent::RunOutcome::BackendError: return FailureKind::BackendError;
    case agent::RunOutcome::Truncated: return FailureKind::Truncation;
  }
  return FailureKind::None;
}

Verdict validate(const QueryCase& query, const agent::AgentRun& run, const sim::SimState& state,
                 const tools::ToolRegistry& registry, double clock_reading) {
  const auto& v = query.validator;
  Verdict verdict;
  auto& why = verdict.reasons;

  if (run.outcome != agent::RunOutcome::Finished) {
    verdict.failure_kind = failure_kind_for(run.outcome);
    why.push_back("run ended with outcome " + agent::to_string(run.outcome));
    return verdict;
  }

  const auto& answer = run.final_answer;
  bool answer_ok = true;
  for (const auto& s : v.required_substrings) {
    const auto values = !s.empty() && s.front() == '$' ? resolve_reference(s, state, registry, clock_reading)
                                                       : std::vector<std::string>{s};
    for (const auto& value : values) {
      if (answer.find(value) == std::string::npos) {
        answer_ok = false;
        why.push_back("answer lacks '" + value + "'");
      }
    }
  }
  if (v.answer_regex && !std::regex_search(answer, compile(*v.answer_regex, query.id))) {
    answer_ok = false;
    why.push_back("answer does not match " + *v.answer_regex);
  }
  if (v.answer_lines_regex) {
    const auto re = compile(*v.answer_lines_regex, query.id);
    for (auto line : text::split_lines(answer)) {
      if (text::trim(line).empty()) continue;
      if (!std::regex_search(line.begin(), line.end(), re)) {
        answer_ok = false;
        why.push_back("answer line does not match " + *v.answer_lines_regex + ": " + std::string(line.substr(0, 80)));
        break;
      }
    }
  }

  const auto actions = action_sequence(run.trace);
  bool tools_ok = true;
  for (auto id : v.required_tools) {
    const auto name = action_of(id, registry, query.id);
    if (std::find(actions.begin(), actions.end(), name) == actions.end()) {
      tools_ok = false;
      why.push_back("tool " + name + " was not used");
    }
  }
  for (const auto& [a, b] : v.ordering) {
    const auto first_a = std::find(actions.begin(), actions.end(), action_of(a, registry, query.id));
    const auto last_b = std::find(actions.rbegin(), actions.rend(), action_of(b, registry, query.id));
    if (first_a == actions.end() || last_b == actions.rend() ||
        std::distance(actions.begin(), first_a) >= std::distance(last_b, actions.rend()) - 1) {
      tools_ok = false;
      why.push_back(to_string(a) + " was not used before " + to_string(b));
    }
  }

  bool artifacts_ok = true;
  for (const auto& c : v.artifact_checks) {
    std::smatch m;
    if (!std::regex_search(answer, m, compile(c.filename_regex, query.id))) {
      artifacts_ok = false;
      why.push_back("answer names no file matching " + c.filename_regex);
      continue;
    }
    if (c.must_exist && !std::filesystem::is_regular_file(state.artifact_dir() / m[0].str())) {
      artifacts_ok = false;
      why.push_back("file " + m[0].str() + " does not exist");
    }
  }

  const bool pass = answer_ok && tools_ok && artifacts_ok;
  if (v.expect_failure) {
    // The query cannot be answered as asked; a finished run is the expected
    // honest non-answer, and it never counts as a success.
    verdict.expected_failure = pass;
    verdict.failure_kind = FailureKind::Deflection;
    if (pass) why.push_back("query is expected to fail");
    return verdict;
  }
  if (pass) {
    verdict.success = true;
    return verdict;
  }
  if (answer_ok && !tools_ok) {
    verdict.failure_kind = FailureKind::ToolMisuse;
  } else if (!answer_ok && actions.empty() && !v.required_tools.empty()) {
    verdict.failure_kind = FailureKind::Deflection;
  } else if (!answer_ok && !tools_ok) {
    verdict.failure_kind = FailureKind::FlawedReasoning;
  } else {
    verdict.failure_kind = FailureKind::Hallucination;
  }
  return verdict;
}

}  // namespace aiops::eval
