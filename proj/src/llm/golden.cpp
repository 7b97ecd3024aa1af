#include <cmath>
#include <regex>

#include <nlohmann/json.hpp>

#include "aiops/llm/scripted.hpp"
#include "aiops/sim/clock.hpp"
#include "aiops/tools/builtin.hpp"
#include "aiops/util/text.hpp"

namespace aiops::llm {

namespace {

namespace act = tools::action;

enum class Scenario {
  Identity,
  ToolDescriptions,
  ToolList,
  Operators,
  Docs,
  Paris,
  River,
  Pods,
  Plot,
  Csv,
  MetricNames,
  PromService,
  Capacity,
  TimeToday,
  TimeIso,
  TimeStamp,
  TimeOffset,
  Unknown,
};

enum class PodsDetail { Overview, ServicesRoutes, Complete, NamesRoutes };

struct Intent {
  Scenario scenario = Scenario::Unknown;
  std::string ns = "demo";
  bool name_version_only = false;
  PodsDetail pods = PodsDetail::Overview;
  std::string metric;
  std::string amount;
  std::string unit;
  bool ago = true;
  std::string prefix;
  std::string target, precision, epochs;
};

bool has(const std::string& q, const char* pattern) {
  return std::regex_search(q, std::regex(pattern, std::regex::icase));
}

std::optional<std::smatch> find(const std::string& q, const char* pattern) {
  std::smatch m;
  if (std::regex_search(q, m, std::regex(pattern, std::regex::icase))) return m;
  return std::nullopt;
}

std::string singular_unit(std::string unit) {
  unit = text::to_lower(unit);
  if (unit.back() != 's') unit += 's';
  return unit;
}

Intent classify(const std::string& q) {
  Intent in;
  if (auto m = find(q, R"(namespace\s+([a-z0-9][a-z0-9-]*))")) in.ns = (*m)[1];
  const auto range = find(q, R"(metric\s+([A-Za-z_:][A-Za-z0-9_:]*)\s+starting\s+(\d+(?:\.\d+)?)\s+(seconds?|minutes?|hours?|days?)\s+ago)");

  if (has(q, R"(who are you)")) {
    in.scenario = Scenario::Identity;
  } else if (has(q, R"(description of the tools)")) {
    in.scenario = Scenario::ToolDescriptions;
  } else if (has(q, R"(tools (do )?you have access to)")) {
    in.scenario = Scenario::ToolList;
  } else if (has(q, R"(\boperators?\b)")) {
    in.scenario = Scenario::Operators;
    in.name_version_only = has(q, R"(only the name and the version)");
  } else if (has(q, R"(data science project|openshift ai|how (can|do) i)")) {
    in.scenario = Scenario::Docs;
  } else if (has(q, R"(describe paris)")) {
    in.scenario = Scenario::Paris;
  } else if (has(q, R"(is there a river)")) {
    in.scenario = Scenario::River;
  } else if (range && has(q, R"(\bplot\b)")) {
    in.scenario = Scenario::Plot;
  } else if (range && has(q, R"(\bcsv\b)")) {
    in.scenario = Scenario::Csv;
  } else if (has(q, R"(\bpods?\b)")) {
    in.scenario = Scenario::Pods;
    if (has(q, R"(only the names and the route)")) {
      in.pods = PodsDetail::NamesRoutes;
    } else if (has(q, R"(service and route)")) {
      in.pods = PodsDetail::ServicesRoutes;
    } else if (has(q, R"(complete summary)")) {
      in.pods = PodsDetail::Complete;
    }
  } else if (has(q, R"(\bmetrics\b)") && has(q, R"(prometheus)")) {
    in.scenario = Scenario::MetricNames;
    if (auto m = find(q, R"(starts with\s+([A-Za-z_:][A-Za-z0-9_:]*))")) in.prefix = (*m)[1];
  } else if (has(q, R"(prometheus service)")) {
    in.scenario = Scenario::PromService;
  } else if (auto m = find(q, R"(kpi of\s+(\d+(?:\.\d+)?)\s+within an?\s+(\d+(?:\.\d+)?)\s+percent)")) {
    in.scenario = Scenario::Capacity;
    in.target = (*m)[1];
    in.precision = (*m)[2];
    in.epochs = "100";
    if (auto e = find(q, R"((\d+)\s+epochs)")) in.epochs = (*e)[1];
  } else if (has(q, R"(what day is today)")) {
    in.scenario = Scenario::TimeToday;
  } else if (has(q, R"(current date ?(and )?time)")) {
    in.scenario = Scenario::TimeIso;
  } else if (has(q, R"(current timestamp)")) {
    in.scenario = Scenario::TimeStamp;
  } else if (auto t = find(q, R"((\d+(?:\.\d+)?)\s+(seconds?|minutes?|hours?|days?)\s+(ago|from now))")) {
    in.scenario = Scenario::TimeOffset;
    in.amount = (*t)[1];
    in.unit = singular_unit((*t)[2]);
    in.ago = text::to_lower((*t)[3].str()) == "ago";
  }
  if (range && (in.scenario == Scenario::Plot || in.scenario == Scenario::Csv)) {
    in.metric = (*range)[1];
    in.amount = (*range)[2];
    in.unit = singular_unit((*range)[3]);
  }
  return in;
}

std::vector<std::string_view> plan(const Intent& in) {
  switch (in.scenario) {
    case Scenario::Operators: return {act::kOperators};
    case Scenario::Docs: return {act::kRag};
    case Scenario::Pods: return {act::kPods};
    case Scenario::Plot: return {act::kServices, act::kTime, act::kTime, act::kPlot};
    case Scenario::Csv: return {act::kServices, act::kTime, act::kTime, act::kMetricRange};
    case Scenario::MetricNames: return {act::kServices, act::kMetricNames};
    case Scenario::PromService: return {act::kServices};
    case Scenario::Capacity: return {act::kMlasp};
    case Scenario::TimeToday:
    case Scenario::TimeIso:
    case Scenario::TimeStamp:
    case Scenario::TimeOffset: return {act::kTime};
    default: return {};
  }
}

// -- completion text -------------------------------------------------------

struct Arg {
  std::string key;
  std::string raw;  // JSON value text
};

Arg s(std::string key, std::string_view value) { return {std::move(key), nlohmann::json(value).dump()}; }
Arg n(std::string key, std::string raw) { return {std::move(key), std::move(raw)}; }

std::string call(std::string_view thought, std::string_view action, const std::vector<Arg>& args) {
  std::string input = "{";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) input += ", ";
    input += nlohmann::json(args[i].key).dump() + ": " + args[i].raw;
  }
  input += "}";
  return "Thought: " + std::string(thought) + "\nAction: " + std::string(action) + "\nAction Input: " + input;
}

std::string finish(std::string_view thought, std::string_view answer) {
  return "Thought: " + std::string(thought) + "\nFinal Answer: " + std::string(answer);
}

std::string finish(std::string_view answer) { return finish("I now know the final answer", answer); }

// -- observation readers ---------------------------------------------------

const PromptTurn* last_of(const PromptView& v, std::string_view action) {
  for (auto it = v.turns.rbegin(); it != v.turns.rend(); ++it) {
    if (it->action == action) return &*it;
  }
  return nullptr;
}

int count_of(const PromptView& v, std::string_view action) {
  int c = 0;
  for (const auto& t : v.turns) c += t.action == action;
  return c;
}

bool is_error(const PromptTurn* t) { return t && text::starts_with(t->observation, "Error:"); }

struct Port {
  std::string number, name;
};
struct Svc {
  std::string name;
  std::vector<Port> ports;
  std::string route;
};

std::vector<Svc> read_services(const std::string& obs) {
  static const std::regex svc_re(R"(ServiceInfo \(name = '([^']*)', ports = \[([^\]]*)\], route = '([^']*)'\))");
  static const std::regex port_re(R"(PortInfo \(port = (\d+), name = '([^']*)')");
  std::vector<Svc> out;
  for (std::sregex_iterator it(obs.begin(), obs.end(), svc_re), end; it != end; ++it) {
    Svc svc{(*it)[1], {}, (*it)[3]};
    const std::string ports = (*it)[2];
    for (std::sregex_iterator p(ports.begin(), ports.end(), port_re); p != end; ++p) {
      svc.ports.push_back({(*p)[1], (*p)[2]});
    }
    out.push_back(std::move(svc));
  }
  return out;
}

struct PromTarget {
  std::string service, port;
};

std::optional<PromTarget> prometheus_of(const std::string& obs) {
  for (const auto& svc : read_services(obs)) {
    if (text::to_lower(svc.name).find("prometheus") == std::string::npos || svc.ports.empty()) continue;
    for (const auto& p : svc.ports) {
      if (p.name == "web") return PromTarget{svc.name, p.number};
    }
    return PromTarget{svc.name, svc.ports.front().number};
  }
  return std::nullopt;
}

struct Pod {
  std::string name;
  std::vector<Svc> services;
};

std::vector<Pod> read_running_pods(const std::string& obs) {
  std::vector<Pod> out;
  const std::string marker = "PodInfo (name = '";
  auto pos = obs.find(marker);
  while (pos != std::string::npos) {
    const auto next = obs.find(marker, pos + marker.size());
    const auto segment = obs.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    const auto name_end = segment.find('\'', marker.size());
    out.push_back({segment.substr(marker.size(), name_end - marker.size()), read_services(segment)});
    pos = next;
  }
  return out;
}

std::string read_counters(const std::string& obs) {
  const auto b = obs.find("pod_counters = {");
  if (b == std::string::npos) return {};
  const auto e = obs.find('}', b);
  return obs.substr(b + 16, e - b - 16);
}

struct TimeObs {
  std::string timestamp, iso;
};

std::optional<TimeObs> read_time(const PromptTurn* t) {
  if (!t) return std::nullopt;
  static const std::regex re(R"(timestamp = (\S+) date_time_iso_format_string = '([^']*)')");
  std::smatch m;
  if (!std::regex_search(t->observation, m, re)) return std::nullopt;
  return TimeObs{m[1], m[2]};
}

std::vector<std::string> read_quoted_list(const std::string& obs) {
  static const std::regex re(R"('([^']*)')");
  std::vector<std::string> out;
  for (std::sregex_iterator it(obs.begin(), obs.end(), re), end; it != end; ++it) out.push_back((*it)[1]);
  return out;
}

int weekday_of(int y, int m, int d) {
  static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  if (m < 3) y -= 1;
  return (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
}

std::string problem(const PromptTurn* t) {
  return "I could not complete the request because the tool reported: " + t->observation;
}

std::string units_phrase(const Intent& in) { return in.amount + " " + in.unit; }

// -- scenarios -------------------------------------------------------------

ScriptedStep identity() {
  return {finish("The user asks who I am. No tool is needed.",
                 "I am an AI assistant for IT operations on OpenShift. I can inspect operators, pods and services in "
                 "a namespace, query and plot Prometheus metrics, compute timestamps, search the OpenShift AI "
                 "documentation and suggest WireMock configurations for a throughput KPI.")};
}

ScriptedStep tool_list(const PromptView& v, bool with_descriptions) {
  std::string answer = "I have access to the following tools:";
  for (const auto& name : v.tool_names) {
    answer += "\n- " + name;
    if (with_descriptions) {
      const auto it = v.tool_descriptions.find(name);
      if (it != v.tool_descriptions.end()) answer += ": " + it->second;
    }
  }
  return {finish("The tools are listed in my instructions. No tool is needed.", answer)};
}

ScriptedStep operators(const PromptView& v, const Intent& in) {
  const auto* t = last_of(v, act::kOperators);
  if (!t) return {call("I need the operators installed in namespace " + in.ns + ".", act::kOperators, {s("namespace", in.ns)})};
  if (is_error(t)) return {finish(problem(t))};
  static const std::regex re(R"(OperatorInfo \(name = '([^']*)', version = '([^']*)', status = '([^']*)'\))");
  std::string answer;
  for (std::sregex_iterator it(t->observation.begin(), t->observation.end(), re), end; it != end; ++it) {
    answer += "\n- " + (*it)[1].str() + " version " + (*it)[2].str();
    if (!in.name_version_only) answer += " (status " + (*it)[3].str() + ")";
  }
  if (answer.empty()) return {finish("There are no operators in namespace " + in.ns + ".")};
  return {finish("The operators in namespace " + in.ns + " are:" + answer)};
}

ScriptedStep docs(const PromptView& v) {
  const auto* t = last_of(v, act::kRag);
  if (!t) return {call("I should search the OpenShift AI documentation.", act::kRag, {s("query", v.question)})};
  if (is_error(t)) return {finish(problem(t))};
  // Steps of the best passage: the text between its header line and the next passage.
  auto body = t->observation;
  if (text::starts_with(body, "low confidence")) return {finish("The documentation does not cover this question.")};
  const auto first_nl = body.find('\n');
  body = first_nl == std::string::npos ? body : body.substr(first_nl + 1);
  const auto next = body.find("\n\n[");
  if (next != std::string::npos) body.resize(next);
  std::string steps;
  for (auto line : text::split_lines(body)) {
    if (!line.empty() && line.front() >= '1' && line.front() <= '9') steps += "\n" + std::string(line);
  }
  if (steps.empty()) return {finish(std::string(text::trim(body)))};
  return {finish("Following the documentation:" + steps)};
}

ScriptedStep paris() {
  return {finish("No tool is needed for a general description.",
                 "Paris is the capital of France, set on the Seine in the north of the country. It is known for the "
                 "Eiffel Tower, the Louvre, Notre-Dame and Montmartre, for its cafes, fashion houses and cuisine, and "
                 "for broad boulevards laid out in the nineteenth century. With more than two million residents in "
                 "the city and over twelve million in the region, it is a centre of finance, culture and science.")};
}

ScriptedStep river(const PromptView& v) {
  if (v.memory.find("Paris") != std::string::npos) {
    return {finish("The previous question was about Paris.", "Yes. The Seine flows through Paris.")};
  }
  return {finish("The question refers to a place I have no context for.",
                 "I cannot tell which place you mean. Please say which city or area you are asking about.")};
}

ScriptedStep pods(const PromptView& v, const Intent& in) {
  const auto* t = last_of(v, act::kPods);
  if (!t) return {call("I need a summary of the pods in namespace " + in.ns + ".", act::kPods, {s("namespace", in.ns)})};
  if (is_error(t)) return {finish(problem(t))};
  const auto running = read_running_pods(t->observation);
  std::string answer = "Pods in namespace " + in.ns + " (" + read_counters(t->observation) + ").";
  if (running.empty()) return {finish(answer + " No pods are running.")};
  answer += " Running pods:";
  for (const auto& pod : running) {
    answer += "\n- " + pod.name;
    if (in.pods == PodsDetail::NamesRoutes) {
      std::vector<std::string> routes;
      for (const auto& svc : pod.services) {
        if (svc.route != aiops::kRouteUnavailable) routes.push_back(svc.route);
      }
      answer += routes.empty() ? ": no route" : ": route " + text::join(routes, ", ");
      continue;
    }
    if (in.pods == PodsDetail::Overview) continue;
    for (const auto& svc : pod.services) {
      std::vector<std::string> ports;
      for (const auto& p : svc.ports) ports.push_back(p.number + "/" + p.name);
      answer += ", service " + svc.name + " (ports " + text::join(ports, ", ") + ")";
      if (in.pods == PodsDetail::ServicesRoutes) answer += ", route " + svc.route;
    }
    if (pod.services.empty()) answer += ", no service";
  }
  return {finish(answer)};
}

ScriptedStep prom_service(const PromptView& v, const Intent& in) {
  const auto* t = last_of(v, act::kServices);
  if (!t) {
    return {call("I need the services in namespace " + in.ns + " to find Prometheus.", act::kServices,
                 {s("namespace", in.ns)})};
  }
  if (is_error(t)) return {finish(problem(t))};
  for (const auto& svc : read_services(t->observation)) {
    if (text::to_lower(svc.name).find("prometheus") == std::string::npos) continue;
    std::vector<std::string> ports;
    for (const auto& p : svc.ports) ports.push_back(p.number + " (" + p.name + ")");
    return {finish("Yes. The Prometheus service " + svc.name + " is running in namespace " + in.ns +
                   " with ports " + text::join(ports, ", ") + ".")};
  }
  return {finish("No Prometheus service is running in namespace " + in.ns + ".")};
}

std::vector<Arg> prom_args(const PromTarget& p, const Intent& in) {
  return {s("prom_service", p.service), s("prom_namespace", in.ns), n("prom_port", p.port)};
}

ScriptedStep metric_names(const PromptView& v, const Intent& in) {
  const auto* svc = last_of(v, act::kServices);
  if (!svc) return prom_service(v, in);
  if (is_error(svc)) return {finish(problem(svc))};
  const auto prom = prometheus_of(svc->observation);
  if (!prom) return {finish("No Prometheus service is running in namespace " + in.ns + ".")};
  const auto* t = last_of(v, act::kMetricNames);
  if (!t) {
    auto args = prom_args(*prom, in);
    args.push_back(s("filter_name", "namespace"));
    args.push_back(s("filter_value", in.ns));
    return {call("The Prometheus service is " + prom->service + " on port " + prom->port +
                     ". Next I list the metrics filtered by namespace " + in.ns + ".",
                 act::kMetricNames, args)};
  }
  if (is_error(t)) return {finish(problem(t))};
  std::vector<std::string> names;
  for (auto& name : read_quoted_list(t->observation)) {
    if (text::starts_with(name, in.prefix)) names.push_back(std::move(name));
  }
  if (names.empty()) return {finish("No matching metrics were found.")};
  return {finish("The metrics are: " + text::join(names, ", "))};
}

ScriptedStep capacity(const PromptView& v, const Intent& in) {
  const auto* t = last_of(v, act::kMlasp);
  if (!t) {
    return {call("I should search for a WireMock configuration that meets the KPI.", act::kMlasp,
                 {n("target_kpi", in.target), n("precision_pct", in.precision), n("epochs", in.epochs)})};
  }
  if (is_error(t)) return {finish(problem(t))};
  return {finish("The configuration search returned: " + t->observation)};
}

ScriptedStep time_query(const PromptView& v, const Intent& in, bool skip_time_tool) {
  if (skip_time_tool) {
    // Dates made up from training data instead of calling the time tool.
    switch (in.scenario) {
      case Scenario::TimeToday: return {finish("Today is Monday, 2023-10-16.")};
      case Scenario::TimeIso: return {finish("The current date time is 2023-10-16T09:30:00.")};
      case Scenario::TimeStamp: return {finish("The current timestamp is 1697448600.")};
      default: return {finish("The timestamp is 1697437800 and the date time is 2023-10-16T06:30:00.")};
    }
  }
  const auto* t = last_of(v, act::kTime);
  if (!t) {
    if (in.scenario == Scenario::TimeOffset) {
      return {call("I need the timestamp for " + units_phrase(in) + (in.ago ? " ago." : " from now."), act::kTime,
                   {n("time_value", in.amount), s("time_metric", in.unit), n("ago_flag", in.ago ? "1" : "0")})};
    }
    return {call("I need the current time.", act::kTime,
                 {s("time_value", "now"), s("time_metric", "seconds"), n("ago_flag", "0")})};
  }
  if (is_error(t)) return {finish(problem(t))};
  const auto obs = read_time(t);
  if (!obs) return {finish(t->observation)};
  switch (in.scenario) {
    case Scenario::TimeToday: {
      const int y = std::stoi(obs->iso.substr(0, 4)), m = std::stoi(obs->iso.substr(5, 2)),
                d = std::stoi(obs->iso.substr(8, 2));
      return {finish("Today is " + sim::weekday_name(weekday_of(y, m, d)) + ", " + obs->iso.substr(0, 10) + ".")};
    }
    case Scenario::TimeIso: return {finish("The current date time is " + obs->iso + ".")};
    case Scenario::TimeStamp: return {finish("The current timestamp is " + obs->timestamp + ".")};
    default:
      return {finish("The timestamp for " + units_phrase(in) + (in.ago ? " ago" : " from now") + " is " +
                     obs->timestamp + " and the date time is " + obs->iso + ".")};
  }
}

ScriptedStep metric_workflow(const PromptView& v, const Intent& in, bool skip_time_tool) {
  const bool plot = in.scenario == Scenario::Plot;
  const auto final_tool = plot ? act::kPlot : act::kMetricRange;
  const auto* svc = last_of(v, act::kServices);
  if (!svc) {
    return {call("To solve the question, I need to first identify the Prometheus service name and port number in "
                 "the \"" + in.ns + "\" namespace. Then, I will use this information to " +
                     (plot ? "plot" : "retrieve") + " the Prometheus metric data for \"" + in.metric + "\" from " +
                     units_phrase(in) + " ago until now.",
                 act::kServices, {s("namespace", in.ns)})};
  }
  if (is_error(svc)) return {finish(problem(svc))};
  const auto prom = prometheus_of(svc->observation);
  if (!prom) return {finish("No Prometheus service is running in namespace " + in.ns + ".")};

  std::string start, end;
  if (skip_time_tool) {
    start = "1727740800";
    end = "1730419200";
  } else {
    const int times = count_of(v, act::kTime);
    if (times == 0) {
      return {call("From the observation, the Prometheus service in the \"" + in.ns + "\" namespace is named \"" +
                       prom->service + "\" and it uses port " + prom->port +
                       ". Next, I need to get the current time and the time " + units_phrase(in) +
                       " ago to define the time range.",
                   act::kTime, {s("time_value", "now"), s("time_metric", "seconds"), n("ago_flag", "0")})};
    }
    if (times == 1) {
      return {call("Now I have the current timestamp. Next, I need to calculate the timestamp for " +
                       units_phrase(in) + " ago.",
                   act::kTime, {n("time_value", in.amount), s("time_metric", in.unit), n("ago_flag", "1")})};
    }
    // The first time call answered "now", the second the range start.
    std::vector<const PromptTurn*> calls;
    for (const auto& t : v.turns) {
      if (t.action == act::kTime) calls.push_back(&t);
    }
    const auto now = read_time(calls[0]);
    const auto ago = read_time(calls[1]);
    if (!now) return {finish(problem(calls[0]))};
    if (!ago) return {finish(problem(calls[1]))};
    start = ago->timestamp;
    end = now->timestamp;
  }

  const auto* t = last_of(v, final_tool);
  if (!t) {
    auto args = prom_args(*prom, in);
    args.push_back(s("metric_name", in.metric));
    args.push_back(n("metric_range_start", start));
    args.push_back(n("metric_range_end", end));
    if (!plot) args.push_back(s("format", "csv"));
    const auto thought =
        skip_time_tool
            ? std::string("The current date is November 1, 2024, so the range starts around October 1, 2024.")
            : "Now I have the timestamp for " + units_phrase(in) + " ago. With both timestamps, I can proceed to " +
                  (plot ? "plot" : "retrieve") + " the metric data for \"" + in.metric + "\" from " +
                  units_phrase(in) + " ago until now using the Prometheus service details.";
    return {call(thought, final_tool, args)};
  }
  if (is_error(t)) return {finish(problem(t))};
  if (plot) {
    static const std::regex re(R"(file_name='([^']*)')");
    std::smatch m;
    if (!std::regex_search(t->observation, m, re)) return {finish(t->observation)};
    return {finish(m[1].str())};
  }
  return {finish(t->observation)};
}

ScriptedStep unknown() {
  return {finish("None of my tools address this question.", "I am not able to answer that question.")};
}

ScriptedStep dispatch(const PromptView& v, const Intent& in, bool skip_time_tool) {
  switch (in.scenario) {
    case Scenario::Identity: return identity();
    case Scenario::ToolDescriptions: return tool_list(v, true);
    case Scenario::ToolList: return tool_list(v, false);
    case Scenario::Operators: return operators(v, in);
    case Scenario::Docs: return docs(v);
    case Scenario::Paris: return paris();
    case Scenario::River: return river(v);
    case Scenario::Pods: return pods(v, in);
    case Scenario::Plot:
    case Scenario::Csv: return metric_workflow(v, in, skip_time_tool);
    case Scenario::MetricNames: return metric_names(v, in);
    case Scenario::PromService: return prom_service(v, in);
    case Scenario::Capacity: return capacity(v, in);
    case Scenario::TimeToday:
    case Scenario::TimeIso:
    case Scenario::TimeStamp:
    case Scenario::TimeOffset: return time_query(v, in, skip_time_tool);
    case Scenario::Unknown: return unknown();
  }
  return unknown();
}

// A plausible-looking first call of `action` made without the information
// earlier steps would have provided.
std::string premature_call(std::string_view action, const Intent& in) {
  if (action == act::kPlot || action == act::kMetricRange) {
    return call("I will get the metric data directly.", action,
                {s("metric_name", in.metric.empty() ? "load_generator_total_msg" : in.metric)});
  }
  if (action == act::kMetricNames) {
    return call("I will list the metrics directly.", action, {s("filter_name", "namespace"), s("filter_value", in.ns)});
  }
  if (action == act::kTime) {
    return call("I will check the time.", action,
                {s("time_value", "now"), s("time_metric", "seconds"), n("ago_flag", "0")});
  }
  if (action == act::kMlasp) return call("I will search for a configuration.", action, {n("epochs", "1")});
  if (action == act::kRag) return call("I will search the documentation.", action, {s("query", "project")});
  return call("I will look at the namespace.", action, {s("namespace", in.ns)});
}

}  // namespace

ScriptedStep golden_step(const PromptView& view, bool skip_time_tool) {
  return dispatch(view, classify(view.question), skip_time_tool);
}

ScriptedStep fault_step(FaultKind kind, const PromptView& view) {
  const auto in = classify(view.question);
  switch (kind) {
    case FaultKind::HallucinateDates: return golden_step(view, true);
    case FaultKind::Deflect:
      return {finish("I do not have direct access to this information.",
                     "To find this out, log in to the OpenShift web console or use the oc command line tool, for "
                     "example oc get pods,svc -n " + in.ns +
                         ", and open the Prometheus or Grafana dashboard to inspect the metric data you need.")};
    case FaultKind::FlawedOrder: {
      const auto tools = plan(in);
      if (view.turns.empty() && !tools.empty()) return {premature_call(tools.back(), in)};
      return {finish("The tools did not give me what I needed.", "I could not find any relevant information.")};
    }
    case FaultKind::Truncate: {
      auto step = golden_step(view);
      const auto pos = step.text.find("\nFinal Answer: ");
      if (pos == std::string::npos) return step;
      const auto answer = step.text.substr(pos + 15);
      // The answer starts without its marker and stops halfway through.
      return {"Thought: I now know the final answer\n" + answer.substr(0, std::max<std::size_t>(1, answer.size() / 2)),
              true};
    }
    case FaultKind::Stall:
      return {call("I should check the time again.", act::kTime,
                   {s("time_value", "now"), s("time_metric", "seconds"), n("ago_flag", "0")})};
  }
  return golden_step(view);
}

}  // namespace aiops::llm
