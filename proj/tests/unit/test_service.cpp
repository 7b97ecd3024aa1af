#include <catch_amalgamated.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <regex>
#include <thread>

#include "aiops/llm/scripted.hpp"
#include "aiops/service/service.hpp"
#include "aiops/util/text.hpp"
#include "test_support.hpp"

using namespace aiops;
using namespace aiops::service;
using nlohmann::json;

namespace {

bool contains(std::string_view haystack, std::string_view needle) { return haystack.find(needle) != std::string_view::npos; }

const char* kQ24 =
    "Find out the Prometheus service name and port number running in namespace demo. Use it to to plot all the "
    "prometheus metric data for the metric load_generator_total_msg starting 48 hours ago until now. Return only the "
    "content string of the tool and nothing else.";

ServiceConfig test_config(const std::filesystem::path& dir) {
  ServiceConfig c;
  c.artifact_dir = dir / "artifacts";
  c.clock = "fixed:1730500568.411993";
  return c;
}

/// Service mounted on a loopback port.
class LiveService {
 public:
  explicit LiveService(ServiceConfig config) : service(std::move(config)) { start(); }
  LiveService(ServiceConfig config, std::vector<std::shared_ptr<llm::CompletionBackend>> backends)
      : service(std::move(config), std::move(backends)) {
    start();
  }
  ~LiveService() {
    server.stop();
    thread.join();
    service.shutdown();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }

  json post(const json& body, int expect = 200) {
    auto res = client().Post("/v1/chat", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }

  /// Reads the whole SSE stream of a trace.
  std::string stream(const std::string& trace_id) {
    std::string body;
    auto res = client().Get("/v1/traces/" + trace_id + "/events", [&](const char* data, std::size_t n) {
      body.append(data, n);
      return true;
    });
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "text/event-stream");
    return body;
  }

  json wait_trace(const std::string& trace_id) {
    for (int i = 0; i < 600; ++i) {
      auto res = client().Get("/v1/traces/" + trace_id);
      REQUIRE(res);
      auto j = json::parse(res->body);
      if (j["status"] == "finished") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    FAIL("trace did not finish");
    return {};
  }

  AgentService service;
  httplib::Server server;
  int port = 0;
  std::thread thread;

 private:
  void start() {
    service.mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
};

struct Frame {
  std::string event;
  std::uint64_t id = 0;
  json data;
};

std::vector<Frame> parse_sse(const std::string& body) {
  std::vector<Frame> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto end = body.find("\n\n", pos);
    REQUIRE(end != std::string::npos);
    Frame f;
    for (auto line : text::split_lines(std::string_view(body).substr(pos, end - pos))) {
      if (text::starts_with(line, "event: ")) f.event = line.substr(7);
      else if (text::starts_with(line, "id: ")) f.id = std::stoull(std::string(line.substr(4)));
      else if (text::starts_with(line, "data: ")) f.data = json::parse(line.substr(6));
    }
    out.push_back(std::move(f));
    pos = end + 2;
  }
  return out;
}

std::vector<std::string> kinds(const std::vector<Frame>& frames) {
  std::vector<std::string> out;
  for (const auto& f : frames) out.push_back(f.event);
  return out;
}

/// Blocks in complete() until released.
class GateBackend : public llm::CompletionBackend {
 public:
  std::string id() const override { return "gate"; }
  llm::CompletionResponse complete(const llm::CompletionRequest&) override {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return open_; });
    llm::CompletionResponse r;
    r.text = "Final Answer: released";
    return r;
  }
  void open() {
    {
      std::lock_guard lock(mu_);
      open_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool open_ = false;
};

}  // namespace

TEST_CASE("service config parsing") {
  const auto c = load_service_config(R"(
bind: 0.0.0.0
port: 9000
artifact_dir: /tmp/x
clock: fixed:1730500568.411993
plot_format: svg
max_concurrent_runs: 2
default_backend: scripted:fault:deflect
backends:
  - id: scripted:golden
  - id: scripted:fault:deflect
  - id: local
    base_url: http://127.0.0.1:1
    model: m
limits: {max_iterations: 4, wall_timeout_s: 9}
memory: {enabled: true, max_turns: 3}
)");
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9000);
  CHECK(c.artifact_dir == "/tmp/x");
  CHECK(c.plot_format == tools::PlotFormat::Svg);
  CHECK(c.max_concurrent_runs == 2);
  CHECK(c.backend_ids == std::vector<std::string>{"scripted:fault:deflect", "scripted:golden", "local"});
  REQUIRE(c.endpoints.size() == 1);
  CHECK(c.limits.max_iterations == 4);
  CHECK(c.limits.wall_timeout_s == 9.0);
  CHECK(c.memory.enabled);
  CHECK(c.memory.max_turns == 3);

  CHECK(load_service_config("").port == 8080);
  CHECK_THROWS_AS(load_service_config("port: 0"), std::invalid_argument);
  CHECK_THROWS_AS(load_service_config("port: many"), std::invalid_argument);
  CHECK_THROWS_AS(load_service_config("default_backend: nope"), std::invalid_argument);
  CHECK_THROWS_AS(load_service_config("limits: {max_iterations: 0}"), std::invalid_argument);
  CHECK_THROWS_AS(load_service_config("clock: tomorrow"), std::invalid_argument);
}

TEST_CASE("artifact names") {
  CHECK(is_artifact_name("FILE-plot-load_generator_total_msg-1730327770-1730500568.png"));
  CHECK(is_artifact_name("FILE-csv-up-1-2.csv"));
  CHECK(is_artifact_name("FILE-plot-a:b-1-2.svg"));
  CHECK_FALSE(is_artifact_name("../secrets"));
  CHECK_FALSE(is_artifact_name("FILE-plot-x-1-2.png/../../etc"));
  CHECK_FALSE(is_artifact_name("sub/FILE-plot-x-1-2.png"));
  CHECK_FALSE(is_artifact_name("FILE-plot-x-1-2.exe"));
  CHECK(artifact_content_type("a.png") == "image/png");
  CHECK(artifact_content_type("a.svg") == "image/svg+xml");
  CHECK(artifact_content_type("a.csv") == "text/csv");
}

TEST_CASE("sse frames") {
  StreamEvent e;
  e.seq = 3;
  e.kind = EventKind::Action;
  e.payload = "Get_timestamp_and_time_ISO";
  e.action_input = "{}";
  const auto f = sse_frame(e);
  CHECK(text::starts_with(f, "event: action\nid: 3\ndata: {"));
  CHECK(std::string_view(f).ends_with("}\n\n"));
  CHECK(json::parse(f.substr(f.find("data: ") + 6))["action_input"] == "{}");
}

TEST_CASE("trace buffer appends a terminal error unless the run ended with a final answer") {
  TraceBuffer ok("t1", "s", "q", "b");
  ok.append(Thought{"x"});
  ok.append(FinalAnswer{"y"});
  agent::AgentRun run;
  run.final_answer = "y";
  ok.finish(run);
  bool done = false;
  auto events = ok.read_from(0, std::chrono::milliseconds(0), done);
  CHECK(done);
  REQUIRE(events.size() == 2);
  CHECK(events.back().kind == EventKind::Final);

  TraceBuffer bad("t2", "s", "q", "b");
  bad.append(Thought{"x"});
  run.outcome = agent::RunOutcome::ParseFailure;
  run.error = "no Action or Final Answer marker";
  bad.finish(run);
  events = bad.read_from(1, std::chrono::milliseconds(0), done);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == EventKind::Error);
  CHECK(events[0].failure_kind == "parse_error");
  bad.append(Thought{"late"});
  CHECK(bad.read_from(0, std::chrono::milliseconds(0), done).size() == 2);
  CHECK(bad.to_json()["outcome"] == "parse_failure");
}

TEST_CASE("post_chat input validation") {
  testing::TempDir dir;
  AgentService svc(test_config(dir.path()));
  CHECK(svc.post_chat(json::array()).status == 400);
  CHECK(svc.post_chat(json::object()).status == 400);
  CHECK(svc.post_chat({{"question", "   "}}).status == 400);
  CHECK(svc.post_chat({{"question", 3}}).status == 400);
  CHECK(svc.post_chat({{"question", "hi"}, {"backend", "nope"}}).status == 400);
  CHECK(svc.post_chat({{"question", "hi"}, {"memory", "yes"}}).status == 400);
  CHECK(svc.post_chat({{"question", "hi"}, {"session_id", 5}}).status == 400);
  const auto r = svc.post_chat({{"question", "Hi, who are you?"}});
  CHECK(r.status == 200);
  CHECK(r.body["backend"] == "scripted:golden");
  svc.shutdown();
  CHECK(svc.post_chat({{"question", "hi"}}).status == 503);
}

TEST_CASE("capacity limit answers 429") {
  testing::TempDir dir;
  auto cfg = test_config(dir.path());
  cfg.max_concurrent_runs = 1;
  auto gate = std::make_shared<GateBackend>();
  AgentService svc(cfg, {gate});
  CHECK(svc.post_chat({{"question", "one"}}).status == 200);
  const auto busy = svc.post_chat({{"question", "two"}});
  CHECK(busy.status == 429);
  CHECK(busy.body["error"] == "agent busy");
  gate->open();
  svc.shutdown();
  CHECK(svc.active_runs() == 0);
}

TEST_CASE("Q-24 streams action/observation pairs then the final answer") {
  testing::TempDir dir;
  auto cfg = test_config(dir.path());
  cfg.clock = "sequence:1730500568.411993,1730500570.333979";
  LiveService live(cfg);
  const auto posted = live.post({{"question", kQ24}});
  const std::string trace_id = posted["trace_id"];
  const auto frames = parse_sse(live.stream(trace_id));

  std::vector<std::string> expected;
  for (int i = 0; i < 4; ++i) expected.insert(expected.end(), {"thought", "action", "observation"});
  expected.insert(expected.end(), {"thought", "final"});
  CHECK(kinds(frames) == expected);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].id == i);
    CHECK(frames[i].data["seq"] == i);
    CHECK(frames[i].data["kind"] == frames[i].event);
  }
  CHECK(frames.back().data["payload"] == "FILE-plot-load_generator_total_msg-1730327770-1730500568.png");

  // Stream payloads rebuild the stored trace.
  const auto stored = live.wait_trace(trace_id);
  REQUIRE(stored["trace"].size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& ev = stored["trace"][i];
    CHECK(ev["type"] == frames[i].event);
    if (frames[i].event == "action") {
      CHECK(ev["action"] == frames[i].data["payload"]);
      CHECK(ev["action_input"] == frames[i].data["action_input"]);
    } else {
      CHECK(ev["text"] == frames[i].data["payload"]);
    }
  }
  CHECK(stored["outcome"] == "finished");
  CHECK(stored["question"] == kQ24);

  // A late subscriber gets the full replay.
  CHECK(kinds(parse_sse(live.stream(trace_id))) == expected);

  // The plot is served.
  auto res = live.client().Get("/v1/artifacts/FILE-plot-load_generator_total_msg-1730327770-1730500568.png");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "image/png");
  CHECK(res->body.substr(1, 3) == "PNG");
}

TEST_CASE("unknown traces and bad artifact names") {
  testing::TempDir dir;
  LiveService live(test_config(dir.path()));
  auto c = live.client();
  auto res = c.Get("/v1/traces/nope/events");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = c.Get("/v1/traces/nope");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = c.Get("/v1/artifacts/..%2Fsecrets");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = c.Get("/v1/artifacts/secrets.txt");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = c.Get("/v1/artifacts/FILE-plot-x-1-2.png");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = c.Post("/v1/chat", "{oops", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("health, tools and backends endpoints") {
  testing::TempDir dir;
  LiveService live(test_config(dir.path()));
  auto c = live.client();
  auto res = c.Get("/healthz");
  REQUIRE(res);
  CHECK(json::parse(res->body)["status"] == "ok");
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  res = c.Get("/v1/tools");
  REQUIRE(res);
  const auto tools = json::parse(res->body);
  CHECK(tools["tools"].size() == 9);
  CHECK(tools["tools"][0].contains("action_name"));
  CHECK(contains(tools["tool_names"].get<std::string>(), "Get_timestamp_and_time_ISO"));
  res = c.Get("/v1/backends");
  REQUIRE(res);
  CHECK(json::parse(res->body)["default"] == "scripted:golden");
}

TEST_CASE("what day is today streams a final event with a date") {
  testing::TempDir dir;
  LiveService live(test_config(dir.path()));
  const auto posted = live.post({{"question", "What day is today?"}});
  const auto frames = parse_sse(live.stream(posted["trace_id"]));
  REQUIRE_FALSE(frames.empty());
  CHECK(frames.back().event == "final");
  const std::string answer = frames.back().data["payload"];
  CHECK(contains(answer, "2024"));
  CHECK(contains(answer, "Friday"));
}

TEST_CASE("failed runs end with an error event") {
  testing::TempDir dir;
  auto failing = std::make_shared<testing::FailingBackend>(std::vector<std::string>{"x"}, 0);
  LiveService live(test_config(dir.path()), {failing});
  const auto posted = live.post({{"question", "anything"}});
  const auto frames = parse_sse(live.stream(posted["trace_id"]));
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].event == "error");
  CHECK(frames[0].data["failure_kind"] == "backend_error");
}

TEST_CASE("concurrent sessions stay isolated") {
  testing::TempDir dir;
  auto cfg = test_config(dir.path());
  cfg.max_concurrent_runs = 8;
  LiveService live(cfg);
  const std::vector<std::string> questions{"Hi, who are you?", "What day is today?", kQ24,
                                           "What operators are in namespace demo?"};
  std::vector<json> posted;
  for (const auto& q : questions) posted.push_back(live.post({{"question", q}}));
  std::set<std::string> sessions;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    sessions.insert(posted[i]["session_id"].get<std::string>());
    const auto stored = live.wait_trace(posted[i]["trace_id"]);
    CHECK(stored["question"] == questions[i]);
    CHECK(stored["session_id"] == posted[i]["session_id"]);
  }
  CHECK(sessions.size() == questions.size());
}

TEST_CASE("session memory is opt-in per request") {
  testing::TempDir dir;
  auto gate = std::make_shared<testing::CannedBackend>(std::vector<std::string>{"Final Answer: Paris is lovely."});
  LiveService live(test_config(dir.path()), {gate});
  const auto first = live.post({{"question", "Can you describe Paris?"}, {"session_id", "s-1"}});
  live.wait_trace(first["trace_id"]);
  const auto second = live.post({{"question", "Is there a river?"}, {"session_id", "s-1"}, {"memory", true}});
  live.wait_trace(second["trace_id"]);
  const auto third = live.post({{"question", "Is there a river?"}, {"session_id", "s-1"}});
  live.wait_trace(third["trace_id"]);
  const auto prompts = gate->prompts();
  REQUIRE(prompts.size() == 3);
  CHECK(contains(prompts[1], "Question: Can you describe Paris?\nFinal Answer: Paris is lovely."));
  CHECK_FALSE(contains(prompts[2], "Can you describe Paris?"));
  CHECK(second["session_id"] == "s-1");
}
