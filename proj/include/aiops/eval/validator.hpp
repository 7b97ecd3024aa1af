#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/agent/runner.hpp"
#include "aiops/domain/types.hpp"
#include "aiops/sim/cluster.hpp"
#include "aiops/tools/registry.hpp"

namespace aiops::eval {

/// A validator that cannot be evaluated: bad reference, bad regex, unknown tool.
class ValidatorConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values a `$...` reference stands for. `clock_reading` is the run clock's
/// first reading; clock references need it. Throws ValidatorConfigError
/// for malformed references or references resolving to nothing.
std::vector<std::string> resolve_reference(std::string_view ref, const sim::SimState& state,
                                           const tools::ToolRegistry& registry, double clock_reading);

/// Resolves every reference of every query (clock references against
/// `clock_reading`) and compiles all regexes. Throws ValidatorConfigError
/// naming the query.
void check_suite_references(const std::vector<QueryCase>& suite, const sim::SimState& state,
                            const tools::ToolRegistry& registry, double clock_reading = 0.0);

struct Verdict {
  bool success = false;
  FailureKind failure_kind = FailureKind::None;
  bool expected_failure = false;
  std::vector<std::string> reasons;  // failed checks, for display
};

FailureKind failure_kind_for(agent::RunOutcome outcome);

Verdict validate(const QueryCase& query, const agent::AgentRun& run, const sim::SimState& state,
                 const tools::ToolRegistry& registry, double clock_reading);

}  // namespace aiops::eval
