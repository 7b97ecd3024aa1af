#include "aiops/tools/builtin.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <system_error>
#include <thread>

#include "aiops/sim/json.hpp"
#include "aiops/tools/mlasp.hpp"
#include "aiops/tools/plot.hpp"
#include "aiops/tools/rag.hpp"
#include "aiops/tools/registry.hpp"
#include "aiops/tools/time_info.hpp"
#include "aiops/util/text.hpp"

namespace aiops::tools {

std::string_view action_name(ToolId id) {
  switch (id) {
    case ToolId::T1: return action::kMlasp;
    case ToolId::T2: return action::kRag;
    case ToolId::T3: return action::kTime;
    case ToolId::T4: return action::kOperators;
    case ToolId::T5: return action::kPods;
    case ToolId::T6: return action::kServices;
    case ToolId::T7: return action::kMetricNames;
    case ToolId::T8: return action::kMetricRange;
    case ToolId::T9: return action::kPlot;
  }
  return {};
}

namespace {

std::string sq(std::string_view s) { return "'" + std::string(s) + "'"; }

std::string render_service(const ServiceInfo& svc) {
  std::vector<std::string> ports;
  for (const auto& p : svc.ports) {
    ports.push_back("PortInfo (port = " + std::to_string(p.port) +
                    ", name = " + sq(p.name.empty() ? "No name available" : p.name) +
                    ", protocol = " + sq(to_string(p.protocol)) + ")");
  }
  return "ServiceInfo (name = " + sq(svc.name) + ", ports = [" + text::join(ports, ", ") +
         "], route = " + sq(svc.route) + ")";
}

}  // namespace

std::string render_operators(std::string_view ns, const std::vector<OperatorInfo>& ops) {
  std::vector<std::string> items;
  for (const auto& op : ops) {
    items.push_back("OperatorInfo (name = " + sq(op.name) + ", version = " + sq(op.version) +
                    ", status = " + sq(op.status) + ")");
  }
  return "namespace = " + sq(ns) + " operators = [" + text::join(items, ", ") + "]";
}

std::string render_pod_summary(const sim::PodSummary& summary) {
  std::vector<std::string> counters;
  for (auto phase : {PodPhase::Running, PodPhase::Succeeded, PodPhase::Pending, PodPhase::Failed}) {
    const auto it = summary.counters.find(phase);
    counters.push_back(to_string(phase) + ": " + std::to_string(it == summary.counters.end() ? 0 : it->second));
  }
  std::vector<std::string> pods;
  for (const auto& pod : summary.running) {
    std::vector<std::string> services;
    for (const auto& svc : pod.services) services.push_back(render_service(svc));
    pods.push_back("PodInfo (name = " + sq(pod.name) + ", services = [" + text::join(services, ", ") + "])");
  }
  return "namespace = " + sq(summary.namespace_name) + " pod_counters = {" + text::join(counters, ", ") +
         "} running_pods = [" + text::join(pods, ", ") + "]";
}

std::string render_services(std::string_view ns, const std::vector<ServiceInfo>& services) {
  std::vector<std::string> items;
  for (const auto& svc : services) items.push_back(render_service(svc));
  return "namespace = " + sq(ns) + " svc_summary = [" + text::join(items, ", ") + "]";
}

std::string render_metric_names(const std::vector<std::string>& names) {
  std::vector<std::string> items;
  for (const auto& n : names) items.push_back(sq(n));
  return "metric_names = [" + text::join(items, ", ") + "]";
}

std::string render_samples(std::string_view metric, std::span<const Sample> samples) {
  std::string out = "metric_name = " + sq(metric) + " samples = [";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i) out += ", ";
    out += "MetricSample (timestamp = " + text::shortest(samples[i].timestamp) +
           ", value = " + text::shortest(samples[i].value) + ")";
  }
  return out + "]";
}

std::string render_csv(std::span<const Sample> samples) {
  std::string out = "timestamp,value";
  for (const auto& s : samples) {
    out += "\n" + std::to_string(static_cast<long long>(std::floor(s.timestamp))) + "," + text::shortest(s.value);
  }
  return out;
}

namespace {

InputField field(std::string name, FieldKind kind, bool required, std::string doc) {
  return InputField{std::move(name), kind, required, std::move(doc)};
}

std::vector<InputField> prom_fields() {
  return {field("prom_service", FieldKind::String, true, "name of the Prometheus service"),
          field("prom_namespace", FieldKind::String, true, "namespace of the Prometheus service"),
          field("prom_port", FieldKind::Integer, true, "port of the Prometheus service")};
}

std::vector<InputField> range_fields() {
  auto f = prom_fields();
  f.push_back(field("metric_name", FieldKind::String, true, "metric to query"));
  f.push_back(field("metric_range_start", FieldKind::Number, true, "range start as a UNIX timestamp"));
  f.push_back(field("metric_range_end", FieldKind::Number, true, "range end as a UNIX timestamp"));
  return f;
}

std::string str(const nlohmann::json& args, const char* key) {
  const auto& v = args.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

double num(const nlohmann::json& args, const char* key) { return args.at(key).get<double>(); }

void check_prometheus(const nlohmann::json& args, const ToolContext& ctx) {
  const auto service = str(args, "prom_service");
  const auto ns = str(args, "prom_namespace");
  const auto port = args.at("prom_port").get<long long>();
  for (const auto& svc : sim::service_summary(ctx.state, ns)) {
    if (svc.name != service) continue;
    for (const auto& p : svc.ports) {
      if (p.port == port) return;
    }
    throw ToolError("service '" + service + "' in namespace '" + ns + "' has no port " + std::to_string(port));
  }
  throw ToolError("no service '" + service + "' in namespace '" + ns + "'");
}

sim::RangeResult query_range(const nlohmann::json& args, const ToolContext& ctx) {
  check_prometheus(args, ctx);
  const auto metric = str(args, "metric_name");
  sim::RangeResult range;
  try {
    range = sim::range_samples(ctx.state, metric, num(args, "metric_range_start"), num(args, "metric_range_end"));
  } catch (const std::invalid_argument& e) {
    throw ToolError(e.what());
  }
  if (!range.metric_known) throw ToolError("unknown metric '" + metric + "'");
  if (range.samples.empty()) throw ToolError("no data in range");
  return range;
}

ToolResult tool_mlasp(const nlohmann::json& args, ToolContext& ctx) {
  MlaspResult r;
  try {
    r = mlasp_search(num(args, "target_kpi"), num(args, "precision_pct"),
                     static_cast<int>(args.at("epochs").get<long long>()), ctx.seed);
  } catch (const std::invalid_argument& e) {
    throw ToolError(e.what());
  }
  ToolResult out;
  out.content = render(r);
  const auto& p = r.config.params;
  out.structured = nlohmann::json{{"within_precision", r.within_precision},
                                  {"predicted_kpi", r.config.predicted_kpi},
                                  {"epochs_searched", r.epochs_searched},
                                  {"params",
                                   {{"async_response_threads", p.async_response_threads},
                                    {"container_cpu", p.container_cpu},
                                    {"container_memory_mb", p.container_memory_mb},
                                    {"jvm_heap_mb", p.jvm_heap_mb}}}};
  return out;
}

ToolResult tool_rag(const nlohmann::json& args, ToolContext& ctx) {
  if (ctx.corpus.empty()) throw ToolError("documentation corpus is empty");
  const int k = args.contains("k") ? static_cast<int>(args.at("k").get<long long>()) : 3;
  if (k < 1) throw ToolError("k must be at least 1");
  const auto hits = ctx.corpus.search(str(args, "query"), k);
  auto rendered = render(hits);
  ToolResult out;
  out.content = std::move(rendered.content);
  auto ids = nlohmann::json::array();
  for (const auto& h : hits) ids.push_back({{"id", h.chunk->id}, {"score", h.score}});
  out.structured = nlohmann::json{{"hits", ids}, {"low_confidence", rendered.low_confidence}};
  return out;
}

ToolResult tool_time(const nlohmann::json& args, ToolContext& ctx) {
  std::optional<double> amount;
  const auto& v = args.at("time_value");
  if (v.is_number()) {
    amount = v.get<double>();
  } else {
    const auto s = text::to_lower(text::trim(v.get<std::string>()));
    if (s != "now") {
      amount = text::parse_double(s);
      if (!amount) throw ToolError("time_value must be 'now' or a number, got '" + v.get<std::string>() + "'");
    }
  }
  const bool ago = args.contains("ago_flag") && args.at("ago_flag").get<long long>() == 1;
  TimeInfo info;
  try {
    info = time_info(amount, parse_time_unit(text::trim(str(args, "time_metric"))), ago, ctx.clock,
                     ctx.state.timezone());
  } catch (const std::invalid_argument& e) {
    throw ToolError(e.what());
  }
  ToolResult out;
  out.content = render(info);
  out.structured = nlohmann::json{{"timestamp", info.timestamp},
                                  {"date_time_iso_format_string", info.date_time_iso_format_string},
                                  {"timezone", info.timezone}};
  return out;
}

ToolResult tool_operators(const nlohmann::json& args, ToolContext& ctx) {
  const auto ns = str(args, "namespace");
  const auto ops = sim::list_operators(ctx.state, ns);
  ToolResult out;
  out.content = render_operators(ns, ops);
  out.structured = nlohmann::json(ops);
  return out;
}

ToolResult tool_pods(const nlohmann::json& args, ToolContext& ctx) {
  const auto summary = sim::pod_summary(ctx.state, str(args, "namespace"));
  ToolResult out;
  out.content = render_pod_summary(summary);
  out.structured = nlohmann::json(summary);
  return out;
}

ToolResult tool_services(const nlohmann::json& args, ToolContext& ctx) {
  const auto ns = str(args, "namespace");
  const auto services = sim::service_summary(ctx.state, ns);
  ToolResult out;
  out.content = render_services(ns, services);
  out.structured = nlohmann::json(services);
  return out;
}

ToolResult tool_metric_names(const nlohmann::json& args, ToolContext& ctx) {
  check_prometheus(args, ctx);
  std::vector<std::string> names;
  try {
    names = sim::metric_names(ctx.state, str(args, "filter_name"), str(args, "filter_value"));
  } catch (const std::invalid_argument& e) {
    throw ToolError(e.what());
  }
  ToolResult out;
  out.content = render_metric_names(names);
  out.structured = nlohmann::json(names);
  return out;
}

ToolResult tool_metric_range(const nlohmann::json& args, ToolContext& ctx) {
  const auto format = args.contains("format") ? text::to_lower(text::trim(str(args, "format"))) : "samples";
  if (format != "samples" && format != "csv") throw ToolError("format must be 'samples' or 'csv'");
  const auto range = query_range(args, ctx);
  ToolResult out;
  out.content = format == "csv" ? render_csv(range.samples) : render_samples(str(args, "metric_name"), range.samples);
  auto rows = nlohmann::json::array();
  for (const auto& s : range.samples) rows.push_back({s.timestamp, s.value});
  out.structured = nlohmann::json{{"metric_name", str(args, "metric_name")}, {"samples", rows}};
  return out;
}

ToolResult tool_plot(const nlohmann::json& args, ToolContext& ctx) {
  const auto range = query_range(args, ctx);
  if (range.samples.size() < 2) throw ToolError("irate undefined: fewer than two samples in range");
  const auto points = sim::irate_points(range.samples);
  const auto metric = str(args, "metric_name");
  const auto name = plot_file_name(metric, num(args, "metric_range_start"), num(args, "metric_range_end"),
                                   ctx.plot_format);
  const auto& dir = ctx.state.artifact_dir();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ToolError("cannot create artifact directory: " + ec.message());
  // Write then rename so concurrent runs producing the same file never expose a partial one.
  static std::atomic<unsigned long> counter{0};
  const auto tmp = dir / (name + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) +
                          "-" + std::to_string(counter++));
  try {
    write_line_chart(tmp, points, ctx.plot_format);
  } catch (const std::exception& e) {
    std::filesystem::remove(tmp, ec);
    throw ToolError(e.what());
  }
  std::filesystem::rename(tmp, dir / name, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ToolError("cannot store plot: " + ec.message());
  }
  ToolResult out;
  out.content = "file_name='" + name + "'";
  out.artifacts.push_back(name);
  out.structured = nlohmann::json{{"file_name", name}, {"points", points.size()}};
  return out;
}

ToolSpec spec(ToolId id, std::string description, std::vector<InputField> inputs, std::string output_doc) {
  return ToolSpec{id, std::string(action_name(id)), std::move(description), std::move(inputs), std::move(output_doc)};
}

}  // namespace

ToolRegistry default_registry() {
  const auto ns_field = field("namespace", FieldKind::String, true, "namespace name");
  ToolRegistry r;
  r.add({spec(ToolId::T1,
              "Generates a set of parameter configurations (thread pool size, CPU, memory, JVM heap) predicted to "
              "support a desired KPI value within a precision percentage, searching for the given number of epochs.",
              {field("target_kpi", FieldKind::Number, true, "desired KPI value"),
               field("precision_pct", FieldKind::Number, true, "allowed deviation in percent"),
               field("epochs", FieldKind::Integer, true, "number of configurations to try")},
              "within_precision, predicted_kpi and the configuration"),
         tool_mlasp});
  r.add({spec(ToolId::T2,
              "Searches the Red Hat OpenShift AI documentation and returns the most relevant passages.",
              {field("query", FieldKind::String, true, "question or keywords"),
               field("k", FieldKind::Integer, false, "number of passages, default 3")},
              "ranked documentation passages"),
         tool_rag});
  r.add({spec(ToolId::T3,
              "Calculates the timestamp, the iso formatted string and the timezone string of the requested time. "
              "time_value is 'now' or a number of time_metric units; ago_flag 1 means in the past, 0 in the future.",
              {field("time_value", FieldKind::String, true, "'now' or a non-negative number"),
               field("time_metric", FieldKind::String, true, "seconds, minutes, hours or days"),
               field("ago_flag", FieldKind::Flag, true, "1 for ago, 0 for from now")},
              "timestamp, date_time_iso_format_string and timezone"),
         tool_time});
  r.add({spec(ToolId::T4, "Lists the operators installed in an OpenShift namespace with their version and status.",
              {ns_field}, "operator names, versions and statuses"),
         tool_operators});
  r.add({spec(ToolId::T5,
              "Summarizes the pods of an OpenShift namespace: counts per phase and, for running pods, their "
              "services with ports and routes.",
              {ns_field}, "pod counters and running pod details"),
         tool_pods});
  r.add({spec(ToolId::T6,
              "Summarizes the services of an OpenShift namespace with their ports, port names, protocols and routes.",
              {ns_field}, "service names, ports and routes"),
         tool_services});
  auto names_fields = prom_fields();
  names_fields.push_back(field("filter_name", FieldKind::String, true, "label name to filter on, e.g. namespace"));
  names_fields.push_back(field("filter_value", FieldKind::String, true, "label value to match"));
  r.add({spec(ToolId::T7, "Lists the Prometheus metric names whose label filter_name equals filter_value.",
              std::move(names_fields), "sorted metric names"),
         tool_metric_names});
  auto range = range_fields();
  range.push_back(field("format", FieldKind::String, false, "'samples' (default) or 'csv'"));
  r.add({spec(ToolId::T8,
              "Lists the samples of a Prometheus metric between two UNIX timestamps, either as MetricSample entries "
              "or as a CSV table with header timestamp,value.",
              std::move(range), "metric samples"),
         tool_metric_range});
  r.add({spec(ToolId::T9,
              "Creates a file with the plot of the instantaneous rate (irate) of a Prometheus metric between two "
              "UNIX timestamps and returns the file name.",
              range_fields(), "file_name of the created plot"),
         tool_plot});
  return r;
}

}  // namespace aiops::tools
