#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "aiops/tools/builtin.hpp"
#include "aiops/tools/mlasp.hpp"
#include "aiops/tools/plot.hpp"
#include "aiops/tools/rag.hpp"
#include "aiops/tools/registry.hpp"
#include "aiops/tools/time_info.hpp"
#include "aiops/util/text.hpp"
#include "test_support.hpp"

using namespace aiops;
using namespace aiops::tools;
using testing::kTraceNow;
using testing::kZone;

namespace {

struct Env {
  testing::TempDir dir;
  std::unique_ptr<sim::SimState> state;
  sim::Clock clock;
  ToolRegistry registry = default_registry();
  ToolContext ctx;

  explicit Env(sim::ClockSpec spec = sim::ClockSpec::fixed(kTraceNow), PlotFormat format = PlotFormat::Png)
      : state(testing::demo_state(dir.path() / "artifacts", spec)),
        clock(spec),
        ctx{*state, clock, builtin_corpus(), format, 7} {}

  ToolResult call(std::string_view action, std::string_view input) { return registry.invoke(action, input, ctx); }
};

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("registry render lists every tool") {
  const auto reg = default_registry();
  REQUIRE(reg.size() == 9);
  const auto r = reg.render();
  CHECK(std::count(r.tool_names_block.begin(), r.tool_names_block.end(), ',') == 8);
  CHECK(contains(r.tool_names_block, "Get_timestamp_and_time_ISO"));
  CHECK(contains(r.tool_names_block, "File_create_plot_irate"));
  CHECK(contains(r.tool_names_block, "Summarize_Services_Information_In_OpenShift_Namespace"));
  CHECK(text::split_lines(r.tools_block).size() == 9);
  for (int i = 1; i <= 9; ++i) {
    const auto id = static_cast<ToolId>(i);
    REQUIRE(reg.find(id));
    CHECK(reg.find(id)->spec.action_name == action_name(id));
  }
}

TEST_CASE("render_registry rejects bad specs") {
  const auto specs = default_registry().specs();
  CHECK(text::split_lines(render_registry({specs[0]}).tools_block).size() == 1);
  CHECK_THROWS_AS(render_registry({}), std::invalid_argument);
  CHECK_THROWS_AS(render_registry({specs[0], specs[0]}), std::invalid_argument);
  auto bad = specs[0];
  bad.action_name = "bad name";
  CHECK_THROWS_AS(render_registry({bad}), std::invalid_argument);
  ToolRegistry reg;
  reg.add({specs[0], nullptr});
  CHECK_THROWS_AS(reg.add({specs[0], nullptr}), std::invalid_argument);
}

TEST_CASE("tool input coercion") {
  const auto reg = default_registry();
  const auto& ops = reg.find(ToolId::T4)->spec;
  CHECK(parse_tool_input(ops, R"({"namespace": "demo"})") == nlohmann::json{{"namespace", "demo"}});
  CHECK(parse_tool_input(ops, "demo") == nlohmann::json{{"namespace", "demo"}});
  CHECK(parse_tool_input(ops, "\"demo\"") == nlohmann::json{{"namespace", "demo"}});
  CHECK_THROWS_AS(parse_tool_input(ops, "{}"), ToolError);
  CHECK(parse_tool_input(ops, R"({"namespace": 3})") == nlohmann::json{{"namespace", "3"}});
  CHECK_THROWS_AS(parse_tool_input(ops, R"({"namespace": [1]})"), ToolError);

  const auto& mlasp = reg.find(ToolId::T1)->spec;
  const auto j = parse_tool_input(mlasp, R"({"target_kpi": "307", "precision_pct": 2.9, "epochs": 100})");
  CHECK(j["target_kpi"].get<double>() == 307.0);
  CHECK_THROWS_AS(parse_tool_input(mlasp, "307"), ToolError);
  CHECK_THROWS_AS(parse_tool_input(mlasp, R"({"target_kpi": 1, "precision_pct": 1, "epochs": 1.5})"), ToolError);
}

TEST_CASE("invoke turns every agent mistake into an observation") {
  Env env;
  auto r = env.call("No_Such_Tool", "{}");
  CHECK(r.is_error);
  CHECK(contains(r.content, "is not a valid tool"));
  r = env.call(action::kOperators, "{not json");
  CHECK(r.is_error);
  r = env.call(action::kOperators, "{}");
  CHECK(r.is_error);
  CHECK(contains(r.content, "namespace"));
}

TEST_CASE("time tool: now with the recorded clock") {
  Env env;
  const auto r = env.call(action::kTime, R"({"time_value": "now", "time_metric": "seconds", "ago_flag": 0})");
  REQUIRE_FALSE(r.is_error);
  CHECK(r.content ==
        "timestamp = 1730500568.411993 date_time_iso_format_string = '2024-11-01T18:36:08.411993-04:00' timezone = "
        "'America/New_York'");
  REQUIRE(r.structured);
  CHECK((*r.structured)["timestamp"].get<double>() == kTraceNow);
}

TEST_CASE("time tool offsets") {
  sim::Clock clock(sim::ClockSpec::fixed(kTraceNow));
  const auto ago = time_info(48.0, TimeUnit::Hours, true, clock, kZone);
  CHECK(ago.timestamp == kTraceNow - 172800);
  const auto back = time_info(3.0, TimeUnit::Hours, true, clock, kZone);
  const auto ahead = time_info(3.0, TimeUnit::Hours, false, clock, kZone);
  CHECK(ahead.timestamp - back.timestamp == 21600);
  CHECK(time_info(std::nullopt, TimeUnit::Days, true, clock, kZone).timestamp == kTraceNow);
  CHECK(time_info(2.0, TimeUnit::Days, true, clock, kZone).timestamp == kTraceNow - 172800);
  CHECK(time_info(90.0, TimeUnit::Minutes, false, clock, kZone).timestamp == kTraceNow + 5400);
  CHECK_THROWS_AS(time_info(-1.0, TimeUnit::Hours, true, clock, kZone), std::invalid_argument);
  CHECK_THROWS_AS(parse_time_unit("weeks"), std::invalid_argument);
  CHECK(parse_time_unit("hours") == TimeUnit::Hours);

  Env env;
  auto r = env.call(action::kTime, R"({"time_value": 5, "time_metric": "fortnights", "ago_flag": 1})");
  CHECK(r.is_error);
  r = env.call(action::kTime, R"({"time_value": -5, "time_metric": "hours", "ago_flag": 1})");
  CHECK(r.is_error);
}

TEST_CASE("recorded trace time step uses the second clock reading") {
  Env env(sim::ClockSpec::sequence({kTraceNow, testing::kTraceSecondRead}));
  env.call(action::kTime, R"({"time_value": "now", "time_metric": "seconds", "ago_flag": 0})");
  const auto r = env.call(action::kTime, R"({"time_value": 48, "time_metric": "hours", "ago_flag": 1})");
  CHECK(r.content ==
        "timestamp = 1730327770.333979 date_time_iso_format_string = '2024-10-30T18:36:10.333979-04:00' timezone = "
        "'America/New_York'");
}

TEST_CASE("cluster tool observations") {
  Env env;
  auto r = env.call(action::kServices, R"({"namespace": "demo"})");
  REQUIRE_FALSE(r.is_error);
  CHECK(contains(r.content, "prometheus-operated"));
  CHECK(contains(r.content, "port = 9090, name = 'web'"));
  CHECK(contains(r.content, "port = 3000, name = 'grafana'"));
  CHECK(contains(r.content, "PortInfo (port = 8086, name = 'No name available', protocol = 'TCP')"));

  r = env.call(action::kOperators, "demo");
  CHECK(r.content ==
        "namespace = 'demo' operators = [OperatorInfo (name = 'rhods-operator', version = '2.8.0', status = "
        "'Succeeded')]");

  r = env.call(action::kPods, R"({"namespace": "demo"})");
  CHECK(contains(r.content, "pod_counters = {Running: 4, Succeeded: 1, Pending: 0, Failed: 0}"));
  CHECK(contains(r.content, "route = 'unavailable'"));
  CHECK_FALSE(contains(r.content, "influxdb-init-job"));

  r = env.call(action::kOperators, "nowhere");
  CHECK_FALSE(r.is_error);
  CHECK(r.content == "namespace = 'nowhere' operators = []");

  r = env.call(action::kMetricNames, R"({"prom_service": "prometheus-operated", "prom_namespace": "demo", "prom_port": 9090,
                                         "filter_name": "namespace", "filter_value": "demo"})");
  REQUIRE_FALSE(r.is_error);
  CHECK(contains(r.content, "'load_generator_total_msg'"));

  r = env.call(action::kMetricNames, R"({"prom_service": "nope", "prom_namespace": "demo", "prom_port": 9090,
                                         "filter_name": "namespace", "filter_value": "demo"})");
  CHECK(r.is_error);
  r = env.call(action::kMetricNames, R"({"prom_service": "prometheus-operated", "prom_namespace": "demo", "prom_port": 1,
                                         "filter_name": "namespace", "filter_value": "demo"})");
  CHECK(r.is_error);
}

TEST_CASE("metric range tool") {
  Env env;
  const std::string base = R"("prom_service": "prometheus-operated", "prom_namespace": "demo", "prom_port": 9090, )";
  auto r = env.call(action::kMetricRange, "{" + base +
                                              R"("metric_name": "load_generator_total_msg", "metric_range_start": 1730400000, "metric_range_end": 1730410800})");
  REQUIRE_FALSE(r.is_error);
  CHECK(contains(r.content, "MetricSample (timestamp = 1730401200"));

  r = env.call(action::kMetricRange, "{" + base +
                                         R"("metric_name": "load_generator_total_msg", "metric_range_start": 1730400000, "metric_range_end": 1730410800, "format": "csv"})");
  REQUIRE_FALSE(r.is_error);
  const auto lines = text::split_lines(r.content);
  CHECK(lines.front() == "timestamp,value");
  CHECK(lines.size() == 4);

  r = env.call(action::kMetricRange, "{" + base +
                                         R"("metric_name": "load_generator_total_msg", "metric_range_start": 20, "metric_range_end": 10})");
  CHECK(r.is_error);
  CHECK(contains(r.content, "start must not exceed end"));

  r = env.call(action::kMetricRange, "{" + base + R"("metric_name": "load_generator_total_msg", "metric_range_start": 1, "metric_range_end": 10})");
  CHECK(r.is_error);
  CHECK(contains(r.content, "no data in range"));

  r = env.call(action::kMetricRange, "{" + base + R"("metric_name": "ghost", "metric_range_start": 1, "metric_range_end": 10})");
  CHECK(r.is_error);
  CHECK(contains(r.content, "unknown metric"));

  r = env.call(action::kMetricRange, "{" + base +
                                         R"("metric_name": "load_generator_total_msg", "metric_range_start": 1730400000, "metric_range_end": 1730410800, "format": "xml"})");
  CHECK(r.is_error);
}

TEST_CASE("csv rendering") {
  CHECK(render_csv(std::vector<Sample>{{10.2, 5.0}, {20.9, 6.5}}) == "timestamp,value\n10,5\n20,6.5");
  CHECK(render_csv(std::vector<Sample>{}) == "timestamp,value");
  std::vector<Sample> many;
  for (int i = 0; i < 1000; ++i) many.push_back({static_cast<double>(i), i * 0.5});
  CHECK(text::split_lines(render_csv(many)).size() == 1001);
}

TEST_CASE("plot tool writes the recorded file name") {
  Env env;
  const auto r = env.call(action::kPlot,
                          R"({"prom_service": "prometheus-operated", "prom_namespace": "demo", "prom_port": 9090, "metric_name": "load_generator_total_msg", "metric_range_start": 1730327770.333979, "metric_range_end": 1730500568.411993})");
  REQUIRE_FALSE(r.is_error);
  CHECK(r.content == "file_name='FILE-plot-load_generator_total_msg-1730327770-1730500568.png'");
  REQUIRE(r.artifacts == std::vector<std::string>{"FILE-plot-load_generator_total_msg-1730327770-1730500568.png"});
  const auto bytes = read_all(env.state->artifact_dir() / r.artifacts[0]);
  REQUIRE(bytes.size() > 8);
  CHECK(bytes.substr(0, 8) == std::string("\x89PNG\r\n\x1a\n", 8));

  // no temp files left behind
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(env.state->artifact_dir())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("plot tool with svg output") {
  Env env(sim::ClockSpec::fixed(kTraceNow), PlotFormat::Svg);
  const auto r = env.call(action::kPlot,
                          R"({"prom_service": "prometheus-operated", "prom_namespace": "demo", "prom_port": 9090, "metric_name": "load_generator_total_msg", "metric_range_start": 1730327770.333979, "metric_range_end": 1730500568.411993})");
  REQUIRE_FALSE(r.is_error);
  CHECK(r.content == "file_name='FILE-plot-load_generator_total_msg-1730327770-1730500568.svg'");
  const auto svg = read_all(env.state->artifact_dir() / r.artifacts[0]);
  CHECK(contains(svg, "<svg"));
  CHECK(contains(svg, "<polyline"));
}

TEST_CASE("plot tool errors") {
  Env env;
  const std::string base = R"("prom_service": "prometheus-operated", "prom_namespace": "demo", "prom_port": 9090, "metric_name": "load_generator_total_msg", )";
  auto r = env.call(action::kPlot, "{" + base + R"("metric_range_start": 1, "metric_range_end": 10})");
  CHECK(r.is_error);
  CHECK(contains(r.content, "no data in range"));
  r = env.call(action::kPlot, "{" + base + R"("metric_range_start": 1730401200, "metric_range_end": 1730401200})");
  CHECK(r.is_error);
  CHECK(contains(r.content, "irate undefined"));
  CHECK(plot_file_name("m", 10.9, 20.1, PlotFormat::Svg) == "FILE-plot-m-10-20.svg");
  CHECK_THROWS_AS(write_line_chart(env.dir.path() / "x.png", std::vector<Sample>{}, PlotFormat::Png), std::invalid_argument);
}

TEST_CASE("rag tokenizer and cosine") {
  CHECK(tokenize("How can I create a Data-Science Project?") ==
        std::vector<std::string>{"how", "can", "i", "create", "a", "data", "science", "project"});
  CHECK(tf_cosine({}, {{"a", 1}}) == 0.0);
  CHECK(tf_cosine({{"a", 1}}, {{"a", 3}}) == Catch::Approx(1.0));
  CHECK(tf_cosine({{"a", 1}, {"b", 1}}, {{"a", 1}}) == Catch::Approx(1.0 / std::sqrt(2.0)));
}

namespace {

// Independent cosine over a vocabulary vector, computed from raw text.
double cosine_oracle(const std::string& a, const std::string& b) {
  std::map<std::string, double> va, vb;
  for (const auto& t : tokenize(a)) va[t] += 1;
  for (const auto& t : tokenize(b)) vb[t] += 1;
  std::set<std::string> vocab;
  for (const auto& [k, _] : va) vocab.insert(k);
  for (const auto& [k, _] : vb) vocab.insert(k);
  double dot = 0, na = 0, nb = 0;
  for (const auto& k : vocab) {
    const double x = va.count(k) ? va[k] : 0, y = vb.count(k) ? vb[k] : 0;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("rag scores match an independent cosine over the bundled corpus") {
  const auto& corpus = builtin_corpus();
  REQUIRE_FALSE(corpus.empty());
  const std::string q = "How can I create a Data Science Project?";
  const auto hits = corpus.search(q, static_cast<int>(corpus.chunks().size()));
  REQUIRE(hits.size() == corpus.chunks().size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    CHECK(hits[i].score == Catch::Approx(cosine_oracle(q, hits[i].chunk->text)).margin(1e-12));
    if (i) CHECK(hits[i - 1].score >= hits[i].score);
  }
  // Only the procedure page mentions the phrase, and it ranks first.
  std::set<std::string> with_phrase;
  for (const auto& c : corpus.chunks()) {
    if (contains(c.text, "Data Science Project")) with_phrase.insert(c.id.substr(0, c.id.find('#')));
  }
  CHECK(with_phrase == std::set<std::string>{"create_data_science_project"});
  CHECK(hits[0].chunk->id.rfind("create_data_science_project#", 0) == 0);
}

TEST_CASE("rag tool rendering, clamping and low confidence") {
  Env env;
  auto r = env.call(action::kRag, R"({"query": "How can I create a Data Science Project?"})");
  REQUIRE_FALSE(r.is_error);
  CHECK(r.content.rfind("[create_data_science_project#", 0) == 0);
  CHECK((*r.structured)["hits"].size() == 3);

  r = env.call(action::kRag, R"({"query": "zzqx qqvw", "k": 2})");
  REQUIRE_FALSE(r.is_error);
  CHECK(contains(r.content, "low confidence"));
  CHECK((*r.structured)["low_confidence"] == true);
  const auto again = env.call(action::kRag, R"({"query": "zzqx qqvw", "k": 2})");
  CHECK(again.content == r.content);

  r = env.call(action::kRag, R"({"query": "project", "k": 10000})");
  CHECK((*r.structured)["hits"].size() == builtin_corpus().chunks().size());

  RagCorpus empty;
  ToolContext ctx{*env.state, env.clock, empty, PlotFormat::Png, 0};
  r = env.registry.invoke(action::kRag, R"({"query": "x"})", ctx);
  CHECK(r.is_error);
}

TEST_CASE("rag corpus splits at headings") {
  RagCorpus c;
  c.add_document("doc", "# One\nalpha\n## Two\nbeta beta\n");
  REQUIRE(c.chunks().size() == 2);
  CHECK(c.chunks()[0].id == "doc#0");
  CHECK(c.chunks()[1].id == "doc#1");
  CHECK(c.chunks()[1].tf.at("beta") == 2);
  const auto hits = c.search("beta", 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].chunk->id == "doc#1");
}

TEST_CASE("mlasp band for the Q-23 request") {
  const auto [lo, hi] = acceptance_band(307, 2.9);
  CHECK(text::fixed(lo, 3) == "298.097");
  CHECK(text::fixed(hi, 3) == "315.903");
  CHECK(lo == Catch::Approx(298.097).margin(1e-9));
  CHECK(hi == Catch::Approx(315.903).margin(1e-9));
  const auto r = mlasp_search(307, 2.9, 100, 7);
  if (r.within_precision) {
    CHECK(r.config.predicted_kpi >= lo);
    CHECK(r.config.predicted_kpi <= hi);
  }
  CHECK(within_bounds(r.config.params));
  CHECK(contains(render(r), "acceptance_band = [298.097, 315.903]"));
}

TEST_CASE("mlasp property: within_precision results lie in the band") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> target(50, 450), prec(0.1, 10);
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    const double t = target(rng), p = prec(rng);
    const auto r = mlasp_search(t, p, 200, rng());
    CHECK(within_bounds(r.config.params));
    CHECK(r.config.predicted_kpi == surrogate_kpi(r.config.params));
    if (r.within_precision) {
      ++hits;
      CHECK(std::abs(r.config.predicted_kpi - t) <= t * p / 100 + 1e-9);
    }
  }
  CHECK(hits > 10);
}

TEST_CASE("mlasp exact and unreachable cases") {
  ConfigSampler s(42);
  const auto first = s.next();
  const auto exact = mlasp_search(surrogate_kpi(first), 0.0, 5, 42);
  CHECK(exact.within_precision);
  CHECK(exact.config.params == first);
  CHECK(exact.epochs_searched == 1);

  const auto miss = mlasp_search(1e9, 1.0, 1, 42);
  CHECK_FALSE(miss.within_precision);
  CHECK(miss.config.params == first);
  CHECK(miss.epochs_searched == 1);

  CHECK_THROWS_AS(mlasp_search(0, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(mlasp_search(1, -1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(mlasp_search(1, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("mlasp sampler stays inside the bounds and is seed-deterministic") {
  ConfigSampler a(5), b(5);
  for (int i = 0; i < 2000; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    REQUIRE(within_bounds(x));
    CHECK(std::round(x.container_cpu * 100) == Catch::Approx(x.container_cpu * 100));
  }
}
