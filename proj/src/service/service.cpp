#include "aiops/service/service.hpp"

#include <httplib.h>

#include <chrono>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "aiops/domain/fixture.hpp"
#include "aiops/eval/validator.hpp"
#include "aiops/llm/factory.hpp"
#include "aiops/sim/clock.hpp"
#include "aiops/util/text.hpp"

namespace aiops::service {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Thought: return "thought";
    case EventKind::Action: return "action";
    case EventKind::Observation: return "observation";
    case EventKind::Final: return "final";
    case EventKind::Error: return "error";
  }
  return "error";
}

nlohmann::json to_json(const StreamEvent& e) {
  nlohmann::json j{{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
  if (e.kind == EventKind::Action) j["action_input"] = e.action_input;
  if (e.kind == EventKind::Error) j["failure_kind"] = e.failure_kind;
  return j;
}

std::string sse_frame(const StreamEvent& e) {
  return "event: " + to_string(e.kind) + "\nid: " + std::to_string(e.seq) + "\ndata: " + to_json(e).dump() + "\n\n";
}

namespace {

nlohmann::json event_json(const AgentEvent& ev) {
  return std::visit(
      [](const auto& e) -> nlohmann::json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Thought>) return {{"type", "thought"}, {"text", e.text}};
        if constexpr (std::is_same_v<T, Action>)
          return {{"type", "action"}, {"action", e.action_name}, {"action_input", e.input_text}};
        if constexpr (std::is_same_v<T, Observation>) return {{"type", "observation"}, {"text", e.text}};
        if constexpr (std::is_same_v<T, FinalAnswer>) return {{"type", "final"}, {"text", e.text}};
      },
      ev);
}

double unix_now() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

TraceBuffer::TraceBuffer(std::string id, std::string session_id, std::string question, std::string backend_id)
    : id_(std::move(id)),
      session_id_(std::move(session_id)),
      question_(std::move(question)),
      backend_id_(std::move(backend_id)) {}

void TraceBuffer::push(StreamEvent e) {
  e.seq = events_.size();
  events_.push_back(std::move(e));
}

void TraceBuffer::append(const AgentEvent& event) {
  StreamEvent e;
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, Thought>) {
          e.kind = EventKind::Thought;
          e.payload = ev.text;
        } else if constexpr (std::is_same_v<T, Action>) {
          e.kind = EventKind::Action;
          e.payload = ev.action_name;
          e.action_input = ev.input_text;
        } else if constexpr (std::is_same_v<T, Observation>) {
          e.kind = EventKind::Observation;
          e.payload = ev.text;
        } else {
          e.kind = EventKind::Final;
          e.payload = ev.text;
        }
      },
      event);
  {
    std::lock_guard lock(mu_);
    if (done_) return;
    trace_.push_back(event);
    push(std::move(e));
  }
  cv_.notify_all();
}

void TraceBuffer::finish(const agent::AgentRun& run) {
  {
    std::lock_guard lock(mu_);
    if (done_) return;
    run_ = run;
    if (run.outcome != agent::RunOutcome::Finished || events_.empty() || events_.back().kind != EventKind::Final) {
      StreamEvent e;
      e.kind = EventKind::Error;
      e.payload = agent::to_string(run.outcome) + (run.error.empty() ? "" : ": " + run.error);
      e.failure_kind = aiops::to_string(eval::failure_kind_for(run.outcome));
      push(std::move(e));
    }
    done_ = true;
  }
  cv_.notify_all();
}

std::vector<StreamEvent> TraceBuffer::read_from(std::size_t from, std::chrono::milliseconds wait, bool& done) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, wait, [&] { return events_.size() > from || done_; });
  std::vector<StreamEvent> out;
  for (auto i = from; i < events_.size(); ++i) out.push_back(events_[i]);
  done = done_;
  return out;
}

bool TraceBuffer::finished() const {
  std::lock_guard lock(mu_);
  return done_;
}

nlohmann::json TraceBuffer::to_json() const {
  std::lock_guard lock(mu_);
  nlohmann::json j{{"trace_id", id_},
                   {"session_id", session_id_},
                   {"question", question_},
                   {"backend", backend_id_},
                   {"status", done_ ? "finished" : "running"}};
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& ev : trace_) trace.push_back(event_json(ev));
  j["trace"] = std::move(trace);
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : events_) events.push_back(service::to_json(e));
  j["events"] = std::move(events);
  if (run_) {
    j["outcome"] = agent::to_string(run_->outcome);
    j["final_answer"] = run_->final_answer;
    j["error"] = run_->error;
    j["artifacts"] = run_->artifacts;
    j["prompt_tokens"] = run_->prompt_tokens;
    j["completion_tokens"] = run_->completion_tokens;
    j["token_source"] = run_->tokens_approximated ? "approximated" : "provider_reported";
  }
  return j;
}

bool is_artifact_name(std::string_view name) {
  static const std::regex grammar(R"(FILE-(plot|csv)-[A-Za-z_:][A-Za-z0-9_:]*-[0-9]+-[0-9]+\.(png|svg|csv))");
  if (name.size() > 255) return false;
  return std::regex_match(name.begin(), name.end(), grammar);
}

std::string artifact_content_type(std::string_view name) {
  if (name.ends_with(".png")) return "image/png";
  if (name.ends_with(".svg")) return "image/svg+xml";
  if (name.ends_with(".csv")) return "text/csv";
  return "application/octet-stream";
}

AgentService::AgentService(ServiceConfig config) : config_(std::move(config)) {
  config_.validate();
  config_.validate_backend_ids();
  std::vector<std::shared_ptr<llm::CompletionBackend>> backends;
  for (const auto& id : config_.backend_ids) backends.push_back(llm::make_backend(id, config_.endpoints));
  init(std::move(backends));
}

AgentService::AgentService(ServiceConfig config, std::vector<std::shared_ptr<llm::CompletionBackend>> backends)
    : config_(std::move(config)) {
  if (backends.empty()) throw std::invalid_argument("no backends");
  config_.backend_ids.clear();
  for (const auto& b : backends) config_.backend_ids.push_back(b->id());
  config_.validate();
  init(std::move(backends));
}

void AgentService::init(std::vector<std::shared_ptr<llm::CompletionBackend>> backends) {
  auto fixture = config_.fixture == "builtin" ? builtin_fixture() : load_fixture_file(config_.fixture);
  state_ = std::make_unique<sim::SimState>(std::move(fixture), config_.artifact_dir, sim::ClockSpec::parse(config_.clock),
                                           config_.timezone);
  std::filesystem::create_directories(config_.artifact_dir);
  registry_ = tools::default_registry();
  corpus_ = tools::builtin_corpus();
  for (auto& b : backends) {
    if (!backends_.emplace(b->id(), b).second) throw std::invalid_argument("duplicate backend '" + b->id() + "'");
  }
  default_backend_ = config_.backend_ids.front();
  std::random_device rd;
  std::ostringstream salt;
  salt << std::hex << ((static_cast<std::uint64_t>(rd()) << 32) | rd());
  id_salt_ = salt.str();
}

AgentService::~AgentService() { shutdown(); }

std::string AgentService::next_id(std::string_view prefix) {
  return std::string(prefix) + "-" + id_salt_ + "-" + std::to_string(++counter_);
}

void AgentService::reap_locked() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->done->load()) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

HttpReply AgentService::post_chat(const nlohmann::json& body) {
  const auto bad = [](int status, std::string msg) { return HttpReply{status, {{"error", std::move(msg)}}}; };
  if (!body.is_object()) return bad(400, "body must be a JSON object");
  if (!body.contains("question") || !body["question"].is_string()) return bad(400, "question is required");
  const auto question = body["question"].get<std::string>();
  if (text::trim(question).empty()) return bad(400, "question is empty");
  std::string backend_id = default_backend_;
  if (body.contains("backend") && !body["backend"].is_null()) {
    if (!body["backend"].is_string()) return bad(400, "backend must be a string");
    backend_id = body["backend"].get<std::string>();
  }
  const auto bit = backends_.find(backend_id);
  if (bit == backends_.end()) return bad(400, "unknown backend '" + backend_id + "'");
  agent::MemoryPolicy memory = config_.memory;
  if (body.contains("memory") && !body["memory"].is_null()) {
    if (!body["memory"].is_boolean()) return bad(400, "memory must be a boolean");
    memory.enabled = body["memory"].get<bool>();
  }
  std::string session_id;
  if (body.contains("session_id") && !body["session_id"].is_null()) {
    if (!body["session_id"].is_string()) return bad(400, "session_id must be a string");
    session_id = body["session_id"].get<std::string>();
  }

  std::lock_guard lock(mu_);
  if (stopping_) return bad(503, "shutting down");
  reap_locked();
  if (active_.load() >= config_.max_concurrent_runs) return bad(429, "agent busy");

  std::shared_ptr<ChatSession> session;
  if (!session_id.empty()) {
    if (auto it = sessions_.find(session_id); it != sessions_.end()) session = it->second;
  }
  if (!session) {
    session = std::make_shared<ChatSession>();
    session->id = session_id.empty() ? next_id("s") : session_id;
    session->created_at = unix_now();
    sessions_.emplace(session->id, session);
  }
  const auto trace_id = next_id("t");
  auto buffer = std::make_shared<TraceBuffer>(trace_id, session->id, question, backend_id);
  traces_.emplace(trace_id, buffer);

  agent::AgentOptions options;
  options.limits = config_.limits;
  options.memory = memory;
  if (memory.enabled) options.memory_text = session->memory.render(memory);
  options.on_event = [buffer](const AgentEvent& e) { buffer->append(e); };

  auto done = std::make_shared<std::atomic<bool>>(false);
  ++active_;
  auto backend = bit->second;
  std::thread worker([this, backend, buffer, session, question, options = std::move(options), done] {
    agent::AgentRun run;
    try {
      sim::Clock clock(state_->clock_spec());
      tools::ToolContext ctx{*state_, clock, corpus_, config_.plot_format, 0};
      run = agent::run_agent(*backend, registry_, ctx, question, options);
    } catch (const std::exception& e) {
      run.outcome = agent::RunOutcome::BackendError;
      run.error = e.what();
    }
    // Turns are kept for display either way; the memory only feeds prompts
    // when the policy is on.
    if (run.outcome == agent::RunOutcome::Finished) session->memory.add(question, run.final_answer);
    {
      std::lock_guard lock(mu_);
      session->turns.emplace_back(question, run.final_answer);
    }
    buffer->finish(run);
    --active_;
    done->store(true);
  });
  workers_.push_back({std::move(worker), done});
  return {200, {{"trace_id", trace_id}, {"session_id", session->id}, {"backend", backend_id}}};
}

std::shared_ptr<const TraceBuffer> AgentService::trace(std::string_view id) const {
  std::lock_guard lock(mu_);
  const auto it = traces_.find(id);
  return it == traces_.end() ? nullptr : it->second;
}

nlohmann::json AgentService::tools_json() const {
  const auto render = registry_.render();
  nlohmann::json tools = nlohmann::json::array();
  for (const auto& spec : registry_.specs()) {
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& f : spec.inputs) {
      inputs.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"required", f.required}, {"doc", f.doc}});
    }
    tools.push_back({{"tool_id", to_string(spec.tool_id)},
                     {"action_name", spec.action_name},
                     {"description", spec.description},
                     {"inputs", std::move(inputs)},
                     {"output", spec.output_doc}});
  }
  return {{"tools", std::move(tools)}, {"tools_block", render.tools_block}, {"tool_names", render.tool_names_block}};
}

std::vector<std::string> AgentService::backend_ids() const { return config_.backend_ids; }

void AgentService::shutdown() {
  std::vector<Worker> workers;
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    workers.swap(workers_);
  }
  for (auto& w : workers) w.thread.join();
}

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, {{"error", message}});
}

}  // namespace

void AgentService::mount(httplib::Server& server) {
  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, {{"status", stopping_ ? "stopping" : "ok"}, {"active_runs", active_.load()}});
  });

  server.Get("/v1/tools", [this](const httplib::Request&, httplib::Response& res) { reply_json(res, 200, tools_json()); });

  server.Get("/v1/backends", [this](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, {{"backends", config_.backend_ids}, {"default", default_backend_},
                          {"memory_enabled", config_.memory.enabled}});
  });

  server.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      reply_error(res, 400, "body is not valid JSON");
      return;
    }
    const auto reply = post_chat(body);
    reply_json(res, reply.status, reply.body);
  });

  server.Get(R"(/v1/traces/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    auto buffer = trace(req.matches[1].str());
    if (!buffer) {
      reply_error(res, 404, "unknown trace");
      return;
    }
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<std::size_t>(0);
    res.set_chunked_content_provider("text/event-stream", [this, buffer, cursor](std::size_t, httplib::DataSink& sink) {
      bool done = false;
      const auto events = buffer->read_from(*cursor, std::chrono::milliseconds(200), done);
      for (const auto& e : events) {
        const auto frame = sse_frame(e);
        if (!sink.write(frame.data(), frame.size())) return false;
        ++*cursor;
      }
      if (done || (stopping_ && buffer->finished())) sink.done();
      return true;
    });
  });

  server.Get(R"(/v1/traces/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto buffer = trace(req.matches[1].str());
    if (!buffer) {
      reply_error(res, 404, "unknown trace");
      return;
    }
    reply_json(res, 200, buffer->to_json());
  });

  server.Get(R"(/v1/artifacts/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto name = req.matches[1].str();
    if (!is_artifact_name(name)) {
      reply_error(res, 400, "invalid artifact name");
      return;
    }
    std::error_code ec;
    const auto root = std::filesystem::weakly_canonical(config_.artifact_dir, ec);
    const auto path = std::filesystem::weakly_canonical(config_.artifact_dir / name, ec);
    if (ec || path.parent_path() != root) {
      reply_error(res, 400, "invalid artifact name");
      return;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in || !std::filesystem::is_regular_file(path)) {
      reply_error(res, 404, "artifact not found");
      return;
    }
    std::ostringstream bytes;
    bytes << in.rdbuf();
    res.status = 200;
    res.set_content(bytes.str(), artifact_content_type(name));
  });
}

}  // namespace aiops::service
