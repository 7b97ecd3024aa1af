#include <catch_amalgamated.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

#include "aiops/sim/clock.hpp"
#include "aiops/sim/cluster.hpp"
#include "aiops/sim/http_facade.hpp"
#include "aiops/sim/json.hpp"
#include "test_support.hpp"

using namespace aiops;
using testing::kTraceNow;
using testing::kZone;

TEST_CASE("fixed clock always answers the same instant") {
  sim::Clock c(sim::ClockSpec::fixed(kTraceNow));
  CHECK(c.now() == kTraceNow);
  CHECK(c.now() == kTraceNow);
  CHECK(c.first_reading() == kTraceNow);
}

TEST_CASE("sequence clock replays then repeats its last value") {
  sim::Clock c(sim::ClockSpec::sequence({1.0, 2.0, 3.0}));
  CHECK(c.now() == 1.0);
  CHECK(c.now() == 2.0);
  CHECK(c.now() == 3.0);
  CHECK(c.now() == 3.0);
  CHECK(c.first_reading() == 1.0);
  CHECK_THROWS(sim::ClockSpec::sequence({}));
}

TEST_CASE("first reading is taken lazily") {
  sim::Clock c(sim::ClockSpec::sequence({5.0, 6.0}));
  CHECK(c.first_reading() == 5.0);
  CHECK(c.now() == 6.0);
  CHECK(c.first_reading() == 5.0);
}

TEST_CASE("system clock tracks wall time") {
  sim::Clock c;
  const double wall = std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  CHECK(std::abs(c.now() - wall) < 5.0);
}

TEST_CASE("clock spec text form") {
  CHECK(sim::ClockSpec::parse("system").mode == sim::ClockSpec::Mode::System);
  const auto f = sim::ClockSpec::parse("fixed:1730500568.411993");
  CHECK(f.mode == sim::ClockSpec::Mode::Fixed);
  CHECK(f.timestamps == std::vector<double>{kTraceNow});
  const auto s = sim::ClockSpec::parse("sequence:1,2.5");
  CHECK(s.timestamps == std::vector<double>{1.0, 2.5});
  CHECK(sim::ClockSpec::parse(s.describe()).timestamps == s.timestamps);
  CHECK(sim::ClockSpec::parse(f.describe()).timestamps == f.timestamps);
  CHECK_THROWS(sim::ClockSpec::parse("fixed:abc"));
  CHECK_THROWS(sim::ClockSpec::parse("sometimes"));
}

TEST_CASE("zone conversion") {
  CHECK(sim::iso8601_micro(kTraceNow, kZone) == "2024-11-01T18:36:08.411993-04:00");
  CHECK(sim::iso8601_seconds(kTraceNow, kZone) == "2024-11-01T18:36:08");
  CHECK(sim::iso8601_micro(testing::kTraceSecondRead - 172800, kZone) == "2024-10-30T18:36:10.333979-04:00");
  // After the DST change the offset is -05:00.
  CHECK(sim::iso8601_micro(1733000000.5, kZone) == "2024-11-30T15:53:20.500000-05:00");
  CHECK(sim::iso8601_micro(0.0, "UTC") == "1970-01-01T00:00:00.000000+00:00");
  const auto lt = sim::to_local(static_cast<std::int64_t>(kTraceNow), kZone);
  CHECK(lt.weekday == 5);
  CHECK(sim::weekday_name(lt.weekday) == "Friday");
  CHECK(lt.utc_offset_s == -4 * 3600);
  CHECK(sim::is_known_zone("UTC"));
  CHECK(sim::is_known_zone(kZone));
  CHECK_FALSE(sim::is_known_zone("Mars/Olympus_Mons"));
  CHECK_THROWS_AS(sim::to_local(0, "Mars/Olympus_Mons"), std::invalid_argument);
}

namespace {

sim::SimState small_state() {
  ClusterFixture f;
  Namespace a;
  a.name = "a";
  a.operators = {{"op-1", "1.0", "Succeeded"}, {"op-2", "2.0", "Installing"}};
  a.services = {{"svc", {{80, "http", Protocol::TCP}}, "unavailable"}, {"lonely", {}, "http://lonely/"}};
  a.pods = {{"p1", PodPhase::Running, {"svc"}}, {"p2", PodPhase::Running, {}}, {"p3", PodPhase::Succeeded, {"svc"}}};
  a.metrics.push_back({"m_total", {{"namespace", "a"}, {"job", "x"}}, std::vector<Sample>{{10, 1}, {20, 2}, {30, 3}}});
  a.metrics.push_back({"m_total", {{"namespace", "a"}, {"job", "y"}}, std::vector<Sample>{{15, 7}}});
  a.metrics.push_back({"other", {{"namespace", "a"}}, std::vector<Sample>{{1, 1}}});
  f.namespaces.push_back(a);
  Namespace empty;
  empty.name = "empty-ns";
  f.namespaces.push_back(empty);
  return sim::SimState(f, "artifacts", sim::ClockSpec::fixed(100));
}

}  // namespace

TEST_CASE("operators listing keeps fixture order") {
  const auto st = small_state();
  const auto ops = sim::list_operators(st, "a");
  REQUIRE(ops.size() == 2);
  CHECK(ops[0].name == "op-1");
  CHECK(ops[1].name == "op-2");
  CHECK(sim::list_operators(st, "nonexistent").empty());

  testing::TempDir dir;
  const auto demo = testing::demo_state(dir.path());
  CHECK(sim::list_operators(*demo, "demo") == std::vector<OperatorInfo>{{"rhods-operator", "2.8.0", "Succeeded"}});
}

TEST_CASE("pod summary counts phases and details running pods") {
  const auto st = small_state();
  const auto s = sim::pod_summary(st, "a");
  CHECK(s.counters.at(PodPhase::Running) == 2);
  CHECK(s.counters.at(PodPhase::Succeeded) == 1);
  CHECK(s.counters.at(PodPhase::Pending) == 0);
  CHECK(s.counters.at(PodPhase::Failed) == 0);
  REQUIRE(s.running.size() == 2);
  CHECK(s.running[0].name == "p1");
  REQUIRE(s.running[0].services.size() == 1);
  CHECK(s.running[0].services[0].route == "unavailable");
  CHECK(s.running[1].services.empty());

  const auto e = sim::pod_summary(st, "empty-ns");
  for (const auto& [phase, n] : e.counters) CHECK(n == 0);
  CHECK(e.counters.size() == 4);
  CHECK(e.running.empty());
}

TEST_CASE("service summary of the demo namespace") {
  testing::TempDir dir;
  const auto st = testing::demo_state(dir.path());
  const auto svcs = sim::service_summary(*st, "demo");
  bool prom = false, grafana = false;
  for (const auto& s : svcs) {
    if (s.name == "prometheus-operated") {
      prom = true;
      CHECK(s.ports == std::vector<PortInfo>{{9090, "web", Protocol::TCP}, {10901, "grpc", Protocol::TCP}});
      CHECK(s.route == "unavailable");
    }
    if (s.name == "grafana-demo-service") {
      grafana = true;
      CHECK(s.ports == std::vector<PortInfo>{{3000, "grafana", Protocol::TCP}});
      CHECK(s.route.rfind("http", 0) == 0);
    }
  }
  CHECK(prom);
  CHECK(grafana);
  CHECK(sim::service_summary(*st, "nope").empty());
}

TEST_CASE("metric names filter and de-duplicate") {
  const auto st = small_state();
  CHECK(sim::metric_names(st, "namespace", "a") == std::vector<std::string>{"m_total", "other"});
  CHECK(sim::metric_names(st, "job", "x") == std::vector<std::string>{"m_total"});
  CHECK(sim::metric_names(st, "namespace", "empty-ns").empty());
  CHECK_THROWS_AS(sim::metric_names(st, "", "a"), std::invalid_argument);

  testing::TempDir dir;
  const auto demo = testing::demo_state(dir.path());
  const auto names = sim::metric_names(*demo, "namespace", "demo");
  CHECK(std::find(names.begin(), names.end(), "load_generator_total_msg") != names.end());
}

TEST_CASE("range samples filter by closed interval and merge series") {
  ClusterFixture f;
  Namespace a;
  a.name = "a";
  a.metrics.push_back({"m", {{"namespace", "a"}}, std::vector<Sample>{{10, 1}, {20, 2}, {30, 3}}});
  f.namespaces.push_back(a);
  const sim::SimState st(f);
  auto r = sim::range_samples(st, "m", 15, 30);
  CHECK(r.metric_known);
  CHECK(r.samples == std::vector<Sample>{{20, 2}, {30, 3}});
  r = sim::range_samples(st, "m", 40, 50);
  CHECK(r.metric_known);
  CHECK(r.samples.empty());
  r = sim::range_samples(st, "nope", 0, 100);
  CHECK_FALSE(r.metric_known);
  CHECK_THROWS_AS(sim::range_samples(st, "m", 30, 10), std::invalid_argument);

  const auto merged = sim::range_samples(small_state(), "m_total", 0, 100);
  CHECK(merged.samples == std::vector<Sample>{{10, 1}, {15, 7}, {20, 2}, {30, 3}});
}

TEST_CASE("irate examples") {
  CHECK(sim::irate_points(std::vector<Sample>{{0, 0}, {10, 50}}) == std::vector<Sample>{{10, 5.0}});
  CHECK(sim::irate_points(std::vector<Sample>{{0, 100}, {10, 40}}) == std::vector<Sample>{{10, 4.0}});
  CHECK(sim::irate_points(std::vector<Sample>{{0, 7}}).empty());
  CHECK(sim::irate_points(std::vector<Sample>{}).empty());
  CHECK_THROWS_AS(sim::irate_points(std::vector<Sample>{{10, 1}, {10, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(sim::irate_points(std::vector<Sample>{{10, 1}, {5, 2}}), std::invalid_argument);
}

namespace {

// For every sample but the first, scan the whole list for its predecessor
// (latest strictly earlier timestamp) and apply the counter rule.
std::vector<Sample> irate_brute(const std::vector<Sample>& s) {
  std::vector<Sample> out;
  for (const auto& cur : s) {
    const Sample* prev = nullptr;
    for (const auto& cand : s) {
      if (cand.timestamp < cur.timestamp && (!prev || cand.timestamp > prev->timestamp)) prev = &cand;
    }
    if (!prev) continue;
    const double dt = cur.timestamp - prev->timestamp;
    const double dv = cur.value >= prev->value ? cur.value - prev->value : cur.value;
    out.push_back({cur.timestamp, dv / dt});
  }
  return out;
}

}  // namespace

TEST_CASE("irate matches brute force on random counters with resets") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> len(0, 40), step(1, 30), inc(0, 100), coin(0, 9);
  int resets = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<Sample> s;
    double t = static_cast<double>(inc(rng));
    double v = 0;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      t += step(rng) + 0.25 * coin(rng);
      if (coin(rng) == 0 && v > 0) {
        v = inc(rng) % 10;
        ++resets;
      } else {
        v += inc(rng);
      }
      s.push_back({t, v});
    }
    REQUIRE(sim::irate_points(s) == irate_brute(s));
  }
  CHECK(resets > 100);
}

TEST_CASE("http facade serves the simulated APIs") {
  testing::TempDir dir;
  std::shared_ptr<const sim::SimState> st = testing::demo_state(dir.path());
  sim::HttpFacade facade(st, "127.0.0.1", 0);
  REQUIRE(facade.port() > 0);
  httplib::Client cli("127.0.0.1", facade.port());

  auto res = cli.Get("/api/v1/label/__name__/values?match[]=%7Bnamespace%3D%22demo%22%7D");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto j = nlohmann::json::parse(res->body);
  CHECK(j["status"] == "success");
  const auto data = j["data"].get<std::vector<std::string>>();
  CHECK(std::find(data.begin(), data.end(), "load_generator_total_msg") != data.end());

  res = cli.Get("/sim/v1/namespaces/demo/services");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(nlohmann::json::parse(res->body) == nlohmann::json(sim::service_summary(*st, "demo")));

  res = cli.Get("/sim/v1/namespaces/demo/pods");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body) == nlohmann::json(sim::pod_summary(*st, "demo")));

  res = cli.Get("/api/v1/query_range?query=load_generator_total_msg&start=1730400000&end=1730500000");
  REQUIRE(res);
  CHECK(res->status == 200);
  j = nlohmann::json::parse(res->body);
  const auto expected = sim::range_samples(*st, "load_generator_total_msg", 1730400000, 1730500000);
  REQUIRE(j["data"]["result"].size() == 1);
  CHECK(j["data"]["result"][0]["values"].size() == expected.samples.size());

  res = cli.Get("/api/v1/query_range?query=load_generator_total_msg&start=20&end=10");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(nlohmann::json::parse(res->body)["status"] == "error");

  res = cli.Get("/api/v1/query_range?query=x");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = cli.Get("/api/v1/label/__name__/values?match[]=garbage");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = cli.Get("/healthz");
  REQUIRE(res);
  CHECK(res->status == 200);
  facade.stop();
}

TEST_CASE("http facade reports bind failures") {
  testing::TempDir dir;
  std::shared_ptr<const sim::SimState> st = testing::demo_state(dir.path());
  // 192.0.2.0/24 is reserved for documentation and never assigned locally.
  CHECK_THROWS_AS(sim::HttpFacade(st, "192.0.2.1", 0), std::runtime_error);
}
