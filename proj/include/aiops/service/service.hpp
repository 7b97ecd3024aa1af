#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "aiops/agent/runner.hpp"
#include "aiops/llm/backend.hpp"
#include "aiops/llm/http_backend.hpp"
#include "aiops/sim/cluster.hpp"
#include "aiops/tools/rag.hpp"
#include "aiops/tools/registry.hpp"

namespace httplib {
class Server;
}

namespace aiops::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path artifact_dir = "artifacts";
  std::string fixture = "builtin";  // path or "builtin"
  std::string clock = "system";     // ClockSpec::parse syntax
  std::string timezone = "America/New_York";
  tools::PlotFormat plot_format = tools::PlotFormat::Png;
  std::vector<std::string> backend_ids{"scripted:golden"};  // first is the default
  std::vector<llm::EndpointConfig> endpoints;
  agent::AgentLimits limits;
  agent::MemoryPolicy memory;
  int max_concurrent_runs = 4;

  /// Throws std::invalid_argument.
  void validate() const;
  /// Every non-scripted backend id must have an endpoint.
  void validate_backend_ids() const;
};

/// YAML keys: bind, port, artifact_dir, fixture, clock, timezone,
/// plot_format, max_concurrent_runs, default_backend, backends (list of
/// {id, base_url?, model?, token_env?, ...}), limits {max_iterations,
/// max_output_chars, wall_timeout_s, malformed_retry_budget}, memory
/// {enabled, max_turns}. Missing keys keep their defaults. Throws
/// std::invalid_argument.
ServiceConfig load_service_config(std::string_view yaml_text);

enum class EventKind { Thought, Action, Observation, Final, Error };

std::string to_string(EventKind k);

struct StreamEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Thought;
  std::string payload;
  std::string action_input;  // action events only
  std::string failure_kind;  // error events only
};

nlohmann::json to_json(const StreamEvent& e);
/// `event: <kind>\nid: <seq>\ndata: <json>\n\n`
std::string sse_frame(const StreamEvent& e);

/// Event log of one agent run. Writers append; any number of readers wait
/// for events past their cursor.
class TraceBuffer {
 public:
  TraceBuffer(std::string id, std::string session_id, std::string question, std::string backend_id);

  void append(const AgentEvent& event);
  /// Records the run and appends the terminal event unless the trace
  /// already ended with a final answer.
  void finish(const agent::AgentRun& run);

  /// Events with seq >= from; waits up to `wait` for at least one when none
  /// are available yet. `done` is set once the terminal event is included.
  std::vector<StreamEvent> read_from(std::size_t from, std::chrono::milliseconds wait, bool& done) const;

  bool finished() const;
  nlohmann::json to_json() const;
  const std::string& id() const { return id_; }

 private:
  void push(StreamEvent e);

  const std::string id_, session_id_, question_, backend_id_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<StreamEvent> events_;
  AgentTrace trace_;
  bool done_ = false;
  std::optional<agent::AgentRun> run_;
};

struct ChatSession {
  std::string id;
  double created_at = 0.0;
  agent::ConversationMemory memory;
  std::vector<std::pair<std::string, std::string>> turns;
};

/// True when `name` is a plot or CSV artifact name: no directories, no
/// dot segments.
bool is_artifact_name(std::string_view name);
std::string artifact_content_type(std::string_view name);

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

class AgentService {
 public:
  /// Loads the fixture and builds every configured backend. Throws on
  /// configuration errors.
  explicit AgentService(ServiceConfig config);
  /// For tests: explicit backends instead of ids.
  AgentService(ServiceConfig config, std::vector<std::shared_ptr<llm::CompletionBackend>> backends);
  ~AgentService();

  AgentService(const AgentService&) = delete;
  AgentService& operator=(const AgentService&) = delete;

  /// Body {"question", "session_id"?, "backend"?, "memory"?}. 200 with
  /// {trace_id, session_id}; 400 for bad input or unknown backend; 429 at
  /// capacity; 503 while shutting down.
  HttpReply post_chat(const nlohmann::json& body);

  std::shared_ptr<const TraceBuffer> trace(std::string_view id) const;
  nlohmann::json tools_json() const;
  std::vector<std::string> backend_ids() const;
  int active_runs() const { return active_.load(); }

  /// Registers every route on `server`.
  void mount(httplib::Server& server);

  /// Stops accepting chats and waits for active runs to end.
  void shutdown();

  const ServiceConfig& config() const { return config_; }
  const sim::SimState& state() const { return *state_; }

 private:
  void init(std::vector<std::shared_ptr<llm::CompletionBackend>> backends);
  std::string next_id(std::string_view prefix);

  ServiceConfig config_;
  std::unique_ptr<sim::SimState> state_;
  tools::ToolRegistry registry_;
  tools::RagCorpus corpus_;
  std::map<std::string, std::shared_ptr<llm::CompletionBackend>> backends_;
  std::string default_backend_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<TraceBuffer>, std::less<>> traces_;
  std::map<std::string, std::shared_ptr<ChatSession>, std::less<>> sessions_;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  void reap_locked();

  std::vector<Worker> workers_;
  std::atomic<int> active_{0};
  std::atomic<bool> stopping_{false};
  std::uint64_t counter_ = 0;
  std::string id_salt_;
};

}  // namespace aiops::service
