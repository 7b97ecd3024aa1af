#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "aiops/agent/runner.hpp"
#include "aiops/domain/suite.hpp"
#include "aiops/eval/harness.hpp"
#include "aiops/eval/validator.hpp"
#include "aiops/llm/scripted.hpp"
#include "aiops/tools/builtin.hpp"
#include "aiops/tools/rag.hpp"
#include "aiops/util/text.hpp"
#include "test_support.hpp"

using namespace aiops;
using namespace aiops::eval;

namespace {

bool contains(std::string_view haystack, std::string_view needle) { return haystack.find(needle) != std::string_view::npos; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunRecord record(std::string q, std::string b, int rep, bool ok, double secs, std::int64_t tokens,
                 FailureKind kind = FailureKind::None) {
  RunRecord r;
  r.query_id = std::move(q);
  r.backend_id = std::move(b);
  r.repetition = rep;
  r.success = ok;
  r.wall_seconds = secs;
  r.total_tokens = tokens;
  r.failure_kind = ok ? FailureKind::None : kind;
  return r;
}

// Nearest rank computed with integers only: smallest k with 100k >= p*n.
double oracle_percentile(std::vector<double> v, int p) {
  std::sort(v.begin(), v.end());
  const auto n = static_cast<long>(v.size());
  long k = (static_cast<long>(p) * n + 99) / 100;
  k = std::max(1L, std::min(k, n));
  return v[static_cast<std::size_t>(k - 1)];
}

struct Bench {
  testing::TempDir dir;
  std::unique_ptr<sim::SimState> state = testing::demo_state(dir.path());
  tools::ToolRegistry registry = tools::default_registry();

  std::vector<RunRecord> run(std::vector<std::string> backend_ids, int reps, int workers,
                             std::vector<QueryCase> suite = builtin_suite()) {
    SuiteRunConfig cfg;
    cfg.suite = std::move(suite);
    for (const auto& id : backend_ids) cfg.backends.push_back(std::make_shared<llm::ScriptedBackend>(llm::make_scripted(id)));
    cfg.repetitions = reps;
    cfg.parallel_workers = workers;
    return run_benchmark(cfg, *state, registry, tools::builtin_corpus());
  }

  agent::AgentRun agent_run(std::string_view backend_id, const QueryCase& q) {
    sim::Clock clock(state->clock_spec());
    tools::ToolContext ctx{*state, clock, tools::builtin_corpus()};
    auto backend = llm::make_scripted(backend_id);
    return agent::run_agent(backend, registry, ctx, q.text);
  }
};

}  // namespace

TEST_CASE("percentile matches the nearest-rank oracle") {
  std::vector<double> ten(10);
  std::iota(ten.begin(), ten.end(), 1.0);
  CHECK(percentile(ten, 50) == 5.0);
  CHECK(percentile(ten, 90) == 9.0);
  CHECK(percentile(ten, 100) == 10.0);
  CHECK(percentile({4.2}, 1) == 4.2);
  CHECK(percentile({4.2}, 100) == 4.2);
  CHECK_THROWS_AS(percentile({}, 50), std::invalid_argument);
  CHECK_THROWS_AS(percentile({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(percentile({1.0}, 101), std::invalid_argument);

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_real_distribution<double> val(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) x = val(rng);
    for (int p = 1; p <= 100; ++p) REQUIRE(percentile(v, p) == oracle_percentile(v, p));
  }
}

TEST_CASE("number formatting") {
  CHECK(format_accuracy(30.0) == "30");
  CHECK(format_accuracy(0.0) == "0");
  CHECK(format_accuracy(100.0) == "100");
  CHECK(format_accuracy(100.0 / 3.0) == "33.3");
  CHECK(format_seconds(1.23456) == "1.235");
  CHECK(format_tokens(10.0) == "10.0");
  CHECK(format_tokens(2.25) == "2.2");
}

TEST_CASE("aggregate accuracy arithmetic") {
  std::vector<RunRecord> recs;
  for (int i = 1; i <= 10; ++i) {
    recs.push_back(record("Q-01", "a", i, i <= 3, 1.0, 10, FailureKind::Hallucination));
    recs.push_back(record("Q-02", "a", i, false, 1.0, 10, FailureKind::Deflection));
    recs.push_back(record("Q-03", "a", i, true, 1.0, 10));
  }
  const auto rep = aggregate(recs, builtin_suite());
  CHECK(format_accuracy(rep.cell("Q-01", "a")->accuracy_pct) == "30");
  CHECK(format_accuracy(rep.cell("Q-02", "a")->accuracy_pct) == "0");
  CHECK(format_accuracy(rep.cell("Q-03", "a")->accuracy_pct) == "100");
  CHECK(rep.cell("Q-01", "a")->annotation == "hallucination x7");
  CHECK(rep.cell("Q-02", "a")->annotation == "deflection x10");
  CHECK(rep.cell("Q-03", "a")->annotation.empty());
  CHECK(rep.rollups.at("a").at(Category::SR).queries == 3);
  CHECK(rep.rollups.at("a").at(Category::SR).accuracy_pct == Catch::Approx(130.0 / 3.0));
  CHECK_THROWS_AS(aggregate({}, builtin_suite()), std::invalid_argument);
}

TEST_CASE("aggregate latency and tokens") {
  std::vector<RunRecord> recs;
  for (int i = 1; i <= 10; ++i) recs.push_back(record("Q-24", "b", i, true, 2.5, 100 + i));
  auto rep = aggregate(recs, builtin_suite());
  const auto* c = rep.cell("Q-24", "b");
  CHECK(c->latency.p50_s == 2.5);
  CHECK(c->latency.p90_s == 2.5);
  CHECK(c->latency.max_s == 2.5);
  CHECK(c->avg_tokens == Catch::Approx(105.5));
  CHECK(rep.rollups.at("b").count(Category::AR) == 1);

  recs.clear();
  for (int i = 1; i <= 10; ++i) recs.push_back(record("Q-24", "b", i, true, i, 1));
  rep = aggregate(recs, builtin_suite());
  CHECK(rep.cell("Q-24", "b")->latency.p50_s == 5.0);
  CHECK(rep.cell("Q-24", "b")->latency.p90_s == 9.0);
  CHECK(rep.cell("Q-24", "b")->latency.max_s == 10.0);
}

TEST_CASE("aggregate is invariant under record order") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> secs(0.1, 5.0);
  std::bernoulli_distribution ok(0.6);
  std::vector<RunRecord> recs;
  for (auto b : {"x", "y"}) {
    for (auto q : {"Q-01", "Q-05", "Q-24"}) {
      for (int i = 1; i <= 10; ++i) recs.push_back(record(q, b, i, ok(rng), secs(rng), 7 * i, FailureKind::ToolMisuse));
    }
  }
  const auto base = aggregate(recs, builtin_suite());
  for (int k = 0; k < 20; ++k) {
    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto other = aggregate(shuffled, builtin_suite());
    for (const auto& c : base.cells) {
      const auto* d = other.cell(c.query_id, c.backend_id);
      REQUIRE(d);
      CHECK(d->successes == c.successes);
      CHECK(d->latency.p50_s == c.latency.p50_s);
      CHECK(d->latency.p90_s == c.latency.p90_s);
      CHECK(d->latency.max_s == c.latency.max_s);
      CHECK(d->avg_tokens == Catch::Approx(c.avg_tokens));
    }
  }
  // Success counts reconcile with the records.
  int total = 0;
  for (const auto& c : base.cells) total += c.successes;
  CHECK(total == std::count_if(recs.begin(), recs.end(), [](const RunRecord& r) { return r.success; }));
}

TEST_CASE("validator: golden Q-24 passes, faults fail with their kinds") {
  Bench b;
  const auto& q = *find_query(builtin_suite(), "Q-24");
  auto run = b.agent_run("scripted:golden", q);
  auto v = validate(q, run, *b.state, b.registry, testing::kTraceNow);
  CHECK(v.success);
  CHECK(v.failure_kind == FailureKind::None);

  run = b.agent_run("scripted:fault:hallucinate_dates", q);
  v = validate(q, run, *b.state, b.registry, testing::kTraceNow);
  CHECK_FALSE(v.success);
  CHECK(v.failure_kind == FailureKind::ToolMisuse);

  run = b.agent_run("scripted:fault:deflect", q);
  v = validate(q, run, *b.state, b.registry, testing::kTraceNow);
  CHECK(v.failure_kind == FailureKind::Deflection);

  run = b.agent_run("scripted:fault:flawed_order", q);
  v = validate(q, run, *b.state, b.registry, testing::kTraceNow);
  CHECK(v.failure_kind == FailureKind::FlawedReasoning);

  const auto& q25 = *find_query(builtin_suite(), "Q-25");
  run = b.agent_run("scripted:fault:truncate", q25);
  v = validate(q25, run, *b.state, b.registry, testing::kTraceNow);
  CHECK(v.failure_kind == FailureKind::Truncation);
}

TEST_CASE("validator: non-finished outcomes map to their kinds") {
  CHECK(failure_kind_for(agent::RunOutcome::Timeout) == FailureKind::Timeout);
  CHECK(failure_kind_for(agent::RunOutcome::MaxIterations) == FailureKind::Timeout);
  CHECK(failure_kind_for(agent::RunOutcome::ParseFailure) == FailureKind::ParseError);
  CHECK(failure_kind_for(agent::RunOutcome::BackendError) == FailureKind::BackendError);
  CHECK(failure_kind_for(agent::RunOutcome::Truncated) == FailureKind::Truncation);
}

TEST_CASE("validator: expected failure is never a success") {
  Bench b;
  const auto& q = *find_query(builtin_suite(), "Q-09");
  const auto run = b.agent_run("scripted:golden", q);
  const auto v = validate(q, run, *b.state, b.registry, testing::kTraceNow);
  CHECK_FALSE(v.success);
  CHECK(v.expected_failure);
  CHECK(v.failure_kind == FailureKind::Deflection);
}

TEST_CASE("validator: adding checks never turns a failure into a success") {
  Bench b;
  std::mt19937_64 rng(17);
  const std::vector<std::string> extra_substrings{"demo", "prometheus", "zzz-not-there", "9090", "FILE-"};
  for (const auto& q : builtin_suite()) {
    const auto run = b.agent_run(q.id == "Q-24" ? "scripted:fault:flawed_order" : "scripted:golden", q);
    const auto base = validate(q, run, *b.state, b.registry, testing::kTraceNow);
    for (const auto& s : extra_substrings) {
      auto stricter = q;
      stricter.validator.required_substrings.push_back(s);
      const auto v = validate(stricter, run, *b.state, b.registry, testing::kTraceNow);
      CHECK(v.success <= base.success);
    }
    auto stricter = q;
    stricter.validator.required_tools.insert(ToolId::T1);
    CHECK(validate(stricter, run, *b.state, b.registry, testing::kTraceNow).success <= base.success);
  }
}

TEST_CASE("validator: ordering uses first(before) < last(after)") {
  Bench b;
  QueryCase q;
  q.id = "Q-X";
  q.text = "x";
  q.validator.ordering = {{ToolId::T3, ToolId::T4}};
  agent::AgentRun run;
  run.outcome = agent::RunOutcome::Finished;
  run.final_answer = "ok";
  const auto& time = b.registry.find(ToolId::T3)->spec.action_name;
  const auto& ops = b.registry.find(ToolId::T4)->spec.action_name;
  const auto step = [](const std::string& a) {
    return std::vector<AgentEvent>{Thought{"t"}, Action{a, "{}"}, Observation{"o"}};
  };
  const auto trace_of = [&](std::vector<std::string> actions) {
    AgentTrace t;
    for (const auto& a : actions) {
      auto s = step(a);
      t.insert(t.end(), s.begin(), s.end());
    }
    t.push_back(Thought{"done"});
    t.push_back(FinalAnswer{"ok"});
    return t;
  };
  run.trace = trace_of({time, ops});
  CHECK(validate(q, run, *b.state, b.registry, 0).success);
  run.trace = trace_of({ops, time});
  CHECK_FALSE(validate(q, run, *b.state, b.registry, 0).success);
  run.trace = trace_of({ops, time, ops});
  CHECK(validate(q, run, *b.state, b.registry, 0).success);
  run.trace = trace_of({time});
  CHECK_FALSE(validate(q, run, *b.state, b.registry, 0).success);
}

TEST_CASE("validator configuration errors surface before any run") {
  Bench b;
  auto suite = builtin_suite();
  suite[0].validator.required_substrings.push_back("$service.nope.port");
  CHECK_THROWS_AS(check_suite_references(suite, *b.state, b.registry), ValidatorConfigError);
  CHECK_THROWS_AS(b.run({"scripted:golden"}, 1, 1, suite), ValidatorConfigError);

  suite = builtin_suite();
  suite[0].validator.answer_regex = "([unclosed";
  CHECK_THROWS_AS(check_suite_references(suite, *b.state, b.registry), ValidatorConfigError);
  CHECK_NOTHROW(check_suite_references(builtin_suite(), *b.state, b.registry));
}

TEST_CASE("run config validation") {
  SuiteRunConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.suite = builtin_suite();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.backends.push_back(std::make_shared<llm::ScriptedBackend>(llm::make_scripted("scripted:golden")));
  CHECK_NOTHROW(cfg.validate());
  cfg.backends.push_back(cfg.backends.front());
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.backends.pop_back();
  cfg.repetitions = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.repetitions = 1;
  cfg.parallel_workers = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("full golden sweep: 250 records in order") {
  Bench b;
  const auto recs = b.run({"scripted:golden"}, 10, 1);
  REQUIRE(recs.size() == 250);
  const auto& suite = builtin_suite();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].query_id == suite[i / 10].id);
    CHECK(recs[i].repetition == static_cast<int>(i % 10) + 1);
  }
  const auto rep = aggregate(recs, suite);
  for (const auto& c : rep.cells) {
    if (c.query_id == "Q-09") {
      CHECK(c.accuracy_pct == 0.0);
      CHECK(c.annotation == "expected failure");
    } else {
      CHECK(c.accuracy_pct == 100.0);
    }
  }
}

TEST_CASE("worker count does not change results") {
  Bench b;
  std::vector<QueryCase> suite;
  for (auto id : {"Q-01", "Q-09", "Q-14", "Q-24", "Q-25"}) suite.push_back(*find_query(builtin_suite(), id));
  const auto one = b.run({"scripted:golden", "scripted:fault:deflect"}, 3, 1, suite);
  const auto four = b.run({"scripted:golden", "scripted:fault:deflect"}, 3, 4, suite);
  REQUIRE(one.size() == 30);
  REQUIRE(four.size() == one.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].query_id == four[i].query_id);
    CHECK(one[i].backend_id == four[i].backend_id);
    CHECK(one[i].repetition == four[i].repetition);
    CHECK(one[i].success == four[i].success);
    CHECK(one[i].failure_kind == four[i].failure_kind);
    CHECK(one[i].final_answer == four[i].final_answer);
    CHECK(one[i].total_tokens == four[i].total_tokens);
  }
  CHECK(one.front().backend_id == "scripted:golden");
  CHECK(one.back().backend_id == "scripted:fault:deflect");
}

TEST_CASE("on_record sees every record") {
  Bench b;
  SuiteRunConfig cfg;
  cfg.suite = {*find_query(builtin_suite(), "Q-01"), *find_query(builtin_suite(), "Q-02")};
  cfg.backends.push_back(std::make_shared<llm::ScriptedBackend>(llm::make_scripted("scripted:golden")));
  cfg.repetitions = 4;
  cfg.parallel_workers = 2;
  int seen = 0;
  cfg.on_record = [&](const RunRecord&) { ++seen; };
  run_benchmark(cfg, *b.state, b.registry, tools::builtin_corpus());
  CHECK(seen == 8);
}

TEST_CASE("memory-on sweep keeps per-repetition conversations") {
  Bench b;
  SuiteRunConfig cfg;
  for (auto id : {"Q-08", "Q-09"}) cfg.suite.push_back(*find_query(builtin_suite(), id));
  cfg.backends.push_back(std::make_shared<llm::ScriptedBackend>(llm::make_scripted("scripted:golden")));
  cfg.repetitions = 2;
  cfg.memory.enabled = true;
  const auto recs = run_benchmark(cfg, *b.state, b.registry, tools::builtin_corpus());
  REQUIRE(recs.size() == 4);
  CHECK(recs[2].query_id == "Q-09");
  // Q-09 keeps its expected-failure verdict even when memory could answer it.
  CHECK_FALSE(recs[2].success);
  CHECK(recs[2].expected_failure);
}

TEST_CASE("report files have the expected shapes") {
  Bench b;
  const auto recs = b.run({"scripted:golden", "scripted:fault:deflect"}, 2, 2);
  const auto rep = aggregate(recs, builtin_suite());
  testing::TempDir out;
  const auto paths = emit_reports(rep, out.path(), parse_report_formats("csv,markdown,json"));
  CHECK(paths.size() == 9);

  const auto rq1 = slurp(out.path() / "rq1_accuracy.csv");
  auto lines = text::split_lines(rq1);
  CHECK(lines[0] == "Query No.,scripted:golden,scripted:fault:deflect,note");
  CHECK(text::starts_with(lines[1], "Q-01,100,"));
  CHECK(contains(rq1, "expected failure"));

  const auto rq2 = slurp(out.path() / "rq2_latency.csv");
  lines = text::split_lines(text::trim(rq2));
  CHECK(lines[0] == "Query No.,Metric,scripted:golden,scripted:fault:deflect");
  CHECK(lines.size() == 1 + 75);
  CHECK(text::starts_with(lines[1], "Q-01,P-50,"));
  CHECK(text::starts_with(lines[2], "Q-01,P-90,"));
  CHECK(text::starts_with(lines[3], "Q-01,Max,"));

  const auto rq3 = slurp(out.path() / "rq3_tokens.csv");
  CHECK(text::starts_with(rq3, "Query No.,scripted:golden (approximated),scripted:fault:deflect (approximated)"));

  const auto md = slurp(out.path() / "rq1_accuracy.md");
  CHECK(contains(md, "| Query No. | scripted:golden | scripted:fault:deflect | note |"));
  CHECK(contains(md, "| Q-01 | 100% |"));
  CHECK(contains(md, "SR"));
  CHECK(contains(md, "AR"));

  const auto j = nlohmann::json::parse(slurp(out.path() / "rq3_tokens.json"));
  CHECK(j["cells"].size() == 50);
  CHECK(j["token_source"]["scripted:golden"] == "approximated");

  CHECK(parse_report_formats("md") == std::set<ReportFormat>{ReportFormat::Markdown});
  CHECK_THROWS_AS(parse_report_formats("csv,xml"), std::invalid_argument);
}
