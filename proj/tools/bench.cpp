// bench: runs the query suite against one or more backends and writes the
// accuracy, latency and token reports.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "aiops/domain/fixture.hpp"
#include "aiops/domain/suite.hpp"
#include "aiops/eval/harness.hpp"
#include "aiops/eval/validator.hpp"
#include "aiops/llm/factory.hpp"
#include "aiops/llm/scripted.hpp"
#include "aiops/sim/clock.hpp"
#include "aiops/tools/rag.hpp"
#include "aiops/util/text.hpp"

namespace {

using namespace aiops;

constexpr const char* kDefaultClock = "fixed:1730500568.411993";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<QueryCase> load_suite_arg(const std::string& arg) {
  return arg == "builtin" ? builtin_suite() : load_suite_file(arg);
}

ClusterFixture load_fixture_arg(const std::string& arg) {
  return arg == "builtin" ? builtin_fixture() : load_fixture_file(arg);
}

sim::ClockSpec parse_clock_arg(const std::string& arg) {
  if (auto ts = text::parse_double(arg)) return sim::ClockSpec::fixed(*ts);
  return sim::ClockSpec::parse(arg);
}

struct RunArgs {
  std::string suite = "builtin";
  std::string fixture = "builtin";
  std::vector<std::string> backends;
  std::string backends_config;
  std::vector<std::string> policies;
  int reps = 10;
  std::uint64_t seed = 0;
  std::string out = "bench-out";
  std::string artifact_dir;
  std::string format = "csv,markdown";
  std::string memory = "off";
  int max_turns = 5;
  int workers = 1;
  std::string clock = kDefaultClock;
  std::string timezone = "America/New_York";
  std::string plot_format = "png";
  int max_iterations = 15;
  double wall_timeout = 180.0;
  bool quiet = false;
};

nlohmann::json record_json(const RunRecord& r) {
  return {{"query_id", r.query_id},
          {"backend_id", r.backend_id},
          {"repetition", r.repetition},
          {"success", r.success},
          {"failure_kind", to_string(r.failure_kind)},
          {"expected_failure", r.expected_failure},
          {"wall_seconds", r.wall_seconds},
          {"prompt_tokens", r.prompt_tokens},
          {"completion_tokens", r.completion_tokens},
          {"total_tokens", r.total_tokens},
          {"token_source", r.tokens_approximated ? "approximated" : "provider_reported"},
          {"actions", action_sequence(r.trace)},
          {"final_answer", r.final_answer}};
}

int cmd_run(const RunArgs& a) {
  eval::SuiteRunConfig cfg;
  std::unique_ptr<sim::SimState> state;
  std::set<eval::ReportFormat> formats;
  try {
    cfg.suite = load_suite_arg(a.suite);
    std::vector<llm::EndpointConfig> endpoints;
    if (!a.backends_config.empty()) endpoints = llm::parse_endpoints(read_file(a.backends_config));
    auto ids = a.backends;
    if (ids.empty() && a.policies.empty()) ids.push_back("scripted:golden");
    for (const auto& id : ids) cfg.backends.push_back(llm::make_backend(id, endpoints));
    for (const auto& p : a.policies) {
      cfg.backends.push_back(std::make_shared<llm::ScriptedBackend>(llm::load_policy_pack(read_file(p), cfg.suite)));
    }
    cfg.repetitions = a.reps;
    cfg.seed = a.seed;
    cfg.parallel_workers = a.workers;
    if (a.memory != "on" && a.memory != "off") throw std::invalid_argument("--memory takes on or off");
    cfg.memory.enabled = a.memory == "on";
    cfg.memory.max_turns = a.max_turns;
    cfg.limits.max_iterations = a.max_iterations;
    cfg.limits.wall_timeout_s = a.wall_timeout;
    cfg.plot_format = tools::parse_plot_format(a.plot_format);
    formats = eval::parse_report_formats(a.format);
    if (!sim::is_known_zone(a.timezone)) throw std::invalid_argument("unknown time zone '" + a.timezone + "'");
    const std::filesystem::path artifacts =
        a.artifact_dir.empty() ? std::filesystem::path(a.out) / "artifacts" : std::filesystem::path(a.artifact_dir);
    std::filesystem::create_directories(artifacts);
    state = std::make_unique<sim::SimState>(load_fixture_arg(a.fixture), artifacts, parse_clock_arg(a.clock), a.timezone);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 2;
  }

  const auto registry = tools::default_registry();
  const auto total = cfg.backends.size() * cfg.suite.size() * static_cast<std::size_t>(cfg.repetitions);
  std::size_t seen = 0;
  if (!a.quiet) {
    cfg.on_record = [&](const RunRecord& r) {
      ++seen;
      if (!r.success && !r.expected_failure) {
        std::cerr << "  " << r.backend_id << " " << r.query_id << " rep " << r.repetition << ": "
                  << to_string(r.failure_kind) << "\n";
      }
      if (seen % 50 == 0 || seen == total) std::cerr << "  " << seen << "/" << total << " runs\n";
    };
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<RunRecord> records;
  try {
    records = eval::run_benchmark(cfg, *state, registry, tools::builtin_corpus());
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 2;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    const auto report = eval::aggregate(records, cfg.suite);
    auto files = eval::emit_reports(report, a.out, formats);
    const auto records_path = std::filesystem::path(a.out) / "records.jsonl";
    std::ofstream out(records_path, std::ios::trunc);
    for (const auto& r : records) out << record_json(r).dump() << "\n";
    if (!out) throw std::runtime_error("cannot write " + records_path.string());
    files.push_back(records_path);
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";

    for (const auto& b : report.backend_ids) {
      std::map<FailureKind, int> kinds;
      int pass = 0, runs = 0;
      for (const auto& r : records) {
        if (r.backend_id != b) continue;
        ++runs;
        pass += r.success ? 1 : 0;
        if (!r.success) ++kinds[r.failure_kind];
      }
      std::cout << b << ": " << pass << "/" << runs << " runs passed";
      for (const auto& [k, n] : kinds) std::cout << ", " << to_string(k) << " " << n;
      std::cout << "\n";
    }
    std::size_t pass = 0;
    for (const auto& r : records) pass += r.success ? 1 : 0;
    std::cout << "pass rate: " << pass << "/" << records.size() << " ("
              << eval::format_accuracy(100.0 * static_cast<double>(pass) / static_cast<double>(records.size()))
              << "%) over " << cfg.suite.size() << " queries x " << cfg.repetitions << " reps x "
              << cfg.backends.size() << " backend(s) in " << text::fixed(elapsed, 2) << " s\n";
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_validate_fixture(const std::string& path) {
  try {
    const auto fixture = load_fixture_file(path);
    std::size_t pods = 0, services = 0, series = 0;
    for (const auto& ns : fixture.namespaces) {
      pods += ns.pods.size();
      services += ns.services.size();
      series += ns.metrics.size();
    }
    std::cout << path << ": ok (" << fixture.namespaces.size() << " namespaces, " << pods << " pods, " << services
              << " services, " << series << " metric series)\n";
    return 0;
  } catch (const FixtureError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 1;
  }
}

int cmd_show_suite(const std::string& suite_arg) {
  std::vector<QueryCase> suite;
  try {
    suite = load_suite_arg(suite_arg);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 2;
  }
  for (const auto& q : suite) {
    std::string tools;
    for (auto t : q.expected_tools) tools += (tools.empty() ? "" : ",") + to_string(t);
    std::cout << q.id << "  " << to_string(q.category) << "  [" << tools << "]"
              << (q.validator.expect_failure ? "  expect-failure" : "") << "\n    " << q.text << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark the ReAct operations agent"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run suite x repetitions x backends and write reports");
  run_cmd->add_option("--suite", run.suite, "Suite YAML file or 'builtin'")->capture_default_str();
  run_cmd->add_option("--fixture", run.fixture, "Cluster fixture file or 'builtin'")->capture_default_str();
  run_cmd->add_option("--backend", run.backends,
                      "Backend id: scripted:golden, scripted:fault:<kind> or an endpoint id (repeatable)");
  run_cmd->add_option("--backends-config", run.backends_config, "YAML list of HTTP endpoints");
  run_cmd->add_option("--policy", run.policies, "Scripted policy pack YAML (repeatable)");
  run_cmd->add_option("--reps", run.reps, "Repetitions per query")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Seed for seeded tools")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Report directory")->capture_default_str();
  run_cmd->add_option("--artifact-dir", run.artifact_dir, "Plot directory (default <out>/artifacts)");
  run_cmd->add_option("--format", run.format, "csv,markdown,json")->capture_default_str();
  run_cmd->add_option("--memory", run.memory, "on|off")->capture_default_str();
  run_cmd->add_option("--memory-turns", run.max_turns, "Turns kept when memory is on")->capture_default_str();
  run_cmd->add_option("--workers", run.workers, "Parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--clock", run.clock, "system | fixed:<ts> | sequence:<ts>,.. | <ts>")->capture_default_str();
  run_cmd->add_option("--timezone", run.timezone, "IANA zone for the time tool")->capture_default_str();
  run_cmd->add_option("--plot-format", run.plot_format, "png|svg")->capture_default_str();
  run_cmd->add_option("--max-iterations", run.max_iterations, "Agent step limit")->capture_default_str();
  run_cmd->add_option("--timeout", run.wall_timeout, "Per-run wall timeout in seconds")->capture_default_str();
  run_cmd->add_flag("--quiet", run.quiet, "No progress output");

  std::string fixture_path;
  auto* vf = app.add_subcommand("validate-fixture", "Check a cluster fixture file");
  vf->add_option("file", fixture_path, "Fixture YAML/JSON")->required();

  std::string show_suite = "builtin";
  auto* ss = app.add_subcommand("show-suite", "List the queries of a suite");
  ss->add_option("--suite", show_suite, "Suite YAML file or 'builtin'")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return cmd_run(run);
  if (*vf) return cmd_validate_fixture(fixture_path);
  return cmd_show_suite(show_suite);
}
