#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace aiops {

// ---------------------------------------------------------------------------
// Tools and queries
// ---------------------------------------------------------------------------

/// Identifier of one of the nine operations tools (T1..T9).
enum class ToolId : std::uint8_t { T1 = 1, T2, T3, T4, T5, T6, T7, T8, T9 };

std::string to_string(ToolId id);
/// Parses "T1".."T9"; throws std::invalid_argument otherwise.
ToolId parse_tool_id(std::string_view text);

enum class Category { SR, AR };

std::string to_string(Category c);
Category parse_category(std::string_view text);

struct ArtifactCheck {
  std::string filename_regex;
  bool must_exist = true;

  friend bool operator==(const ArtifactCheck&, const ArtifactCheck&) = default;
};

/// Declarative answer check for one query. `required_substrings` entries that
/// start with `$` are symbolic references resolved against the fixture, the
/// tool registry or the run clock before comparison.
struct ValidatorSpec {
  std::vector<std::string> required_substrings;
  std::optional<std::string> answer_regex;
  /// Every non-empty answer line must match; checked per line so large
  /// tabular answers never hit the regex engine as one string.
  std::optional<std::string> answer_lines_regex;
  std::set<ToolId> required_tools;
  /// (before, after): some call of `before` must precede some call of `after`.
  std::vector<std::pair<ToolId, ToolId>> ordering;
  std::vector<ArtifactCheck> artifact_checks;
  bool expect_failure = false;

  bool has_checks() const {
    return !required_substrings.empty() || answer_regex.has_value() || answer_lines_regex.has_value() ||
           !required_tools.empty() ||
           !ordering.empty() || !artifact_checks.empty();
  }

  friend bool operator==(const ValidatorSpec&, const ValidatorSpec&) = default;
};

struct QueryCase {
  std::string id;
  Category category = Category::SR;
  std::set<ToolId> expected_tools;
  std::string text;
  ValidatorSpec validator;

  friend bool operator==(const QueryCase&, const QueryCase&) = default;
};

enum class FieldKind { String, Number, Integer, Flag };

std::string to_string(FieldKind k);

struct InputField {
  std::string name;
  FieldKind kind = FieldKind::String;
  bool required = true;
  std::string doc;
};

struct ToolSpec {
  ToolId tool_id = ToolId::T1;
  std::string action_name;
  std::string description;
  std::vector<InputField> inputs;
  std::string output_doc;
};

/// True when `name` matches [A-Za-z][A-Za-z0-9_]*.
bool is_valid_action_name(std::string_view name);

// ---------------------------------------------------------------------------
// Agent traces
// ---------------------------------------------------------------------------

struct Thought {
  std::string text;
  friend bool operator==(const Thought&, const Thought&) = default;
};
struct Action {
  std::string action_name;
  std::string input_text;
  friend bool operator==(const Action&, const Action&) = default;
};
struct Observation {
  std::string text;
  friend bool operator==(const Observation&, const Observation&) = default;
};
struct FinalAnswer {
  std::string text;
  friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;
};

using AgentEvent = std::variant<Thought, Action, Observation, FinalAnswer>;
using AgentTrace = std::vector<AgentEvent>;

/// Empty when the trace is well formed, otherwise a description of the first
/// violation (Action not followed by Observation, FinalAnswer not last, ...).
std::optional<std::string> trace_violation(const AgentTrace& trace);

/// Action names in call order.
std::vector<std::string> action_sequence(const AgentTrace& trace);

// ---------------------------------------------------------------------------
// Benchmark records
// ---------------------------------------------------------------------------

enum class FailureKind {
  None,
  Hallucination,
  Deflection,
  FlawedReasoning,
  Truncation,
  ToolMisuse,
  Timeout,
  ParseError,
  BackendError,
};

std::string to_string(FailureKind k);

struct RunRecord {
  std::string query_id;
  std::string backend_id;
  int repetition = 1;
  double wall_seconds = 0.0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;
  bool success = false;
  FailureKind failure_kind = FailureKind::None;
  /// Set when the validator expected this query to fail and it did.
  bool expected_failure = false;
  bool tokens_approximated = false;
  AgentTrace trace;
  std::string final_answer;
};

struct LatencySummary {
  double p50_s = 0.0;
  double p90_s = 0.0;
  double max_s = 0.0;
};

struct ReportCell {
  std::string query_id;
  std::string backend_id;
  int repetitions = 0;
  int successes = 0;
  double accuracy_pct = 0.0;
  LatencySummary latency;
  double avg_tokens = 0.0;
  std::string annotation;
};

struct CategoryRollup {
  double accuracy_pct = 0.0;
  double p50_s = 0.0;
  double p90_s = 0.0;
  double max_s = 0.0;
  double avg_tokens = 0.0;
  int queries = 0;
};

struct BenchmarkReport {
  std::vector<std::string> query_ids;    // first-seen order
  std::vector<std::string> backend_ids;  // first-seen order
  std::vector<ReportCell> cells;         // query-major, backend-minor
  std::map<std::string, std::map<Category, CategoryRollup>> rollups;  // by backend
  std::map<std::string, bool> tokens_approximated;                     // by backend

  const ReportCell* cell(std::string_view query_id, std::string_view backend_id) const;
};

// ---------------------------------------------------------------------------
// Cluster fixtures
// ---------------------------------------------------------------------------

struct OperatorInfo {
  std::string name;
  std::string version;
  std::string status;
  friend bool operator==(const OperatorInfo&, const OperatorInfo&) = default;
};

enum class PodPhase { Running, Succeeded, Pending, Failed };

std::string to_string(PodPhase p);
PodPhase parse_pod_phase(std::string_view text);

struct PodInfo {
  std::string name;
  PodPhase phase = PodPhase::Running;
  std::vector<std::string> service_refs;
  friend bool operator==(const PodInfo&, const PodInfo&) = default;
};

enum class Protocol { TCP, UDP };

std::string to_string(Protocol p);
Protocol parse_protocol(std::string_view text);

struct PortInfo {
  int port = 0;
  std::string name;  // empty when the port is unnamed
  Protocol protocol = Protocol::TCP;
  friend bool operator==(const PortInfo&, const PortInfo&) = default;
};

inline constexpr std::string_view kRouteUnavailable = "unavailable";

struct ServiceInfo {
  std::string name;
  std::vector<PortInfo> ports;
  std::string route{kRouteUnavailable};
  friend bool operator==(const ServiceInfo&, const ServiceInfo&) = default;
};

struct Sample {
  double timestamp = 0.0;
  double value = 0.0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct CounterGenerator {
  double start_ts = 0.0;
  double end_ts = 0.0;
  double step_s = 1.0;
  double rate_per_s = 1.0;
  std::uint64_t jitter_seed = 0;
  friend bool operator==(const CounterGenerator&, const CounterGenerator&) = default;
};

struct MetricSeriesSpec {
  std::string metric_name;
  std::map<std::string, std::string> labels;
  std::variant<std::vector<Sample>, CounterGenerator> source;
  friend bool operator==(const MetricSeriesSpec&, const MetricSeriesSpec&) = default;
};

struct Namespace {
  std::string name;
  std::vector<OperatorInfo> operators;
  std::vector<PodInfo> pods;
  std::vector<ServiceInfo> services;
  std::vector<MetricSeriesSpec> metrics;
  friend bool operator==(const Namespace&, const Namespace&) = default;
};

struct ClusterFixture {
  std::vector<Namespace> namespaces;

  const Namespace* find_namespace(std::string_view name) const;
  friend bool operator==(const ClusterFixture&, const ClusterFixture&) = default;
};

}  // namespace aiops
