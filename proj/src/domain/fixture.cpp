#include "aiops/domain/fixture.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "aiops/resources.hpp"
#include "aiops/util/text.hpp"

namespace aiops {

FixtureError::FixtureError(Kind kind, std::string message, int line, int column)
    : std::runtime_error([&] {
        std::string prefix = kind == Kind::Syntax ? "fixture syntax error" : "fixture error";
        if (line > 0) prefix += " at line " + std::to_string(line) + ", column " + std::to_string(column);
        return prefix + ": " + message;
      }()),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

[[noreturn]] void semantic(const YAML::Node& at, const std::string& message) {
  const auto mark = at.Mark();
  if (mark.is_null()) throw FixtureError(FixtureError::Kind::Semantic, message);
  throw FixtureError(FixtureError::Kind::Semantic, message, mark.line + 1, mark.column + 1);
}

[[noreturn]] void semantic(const std::string& message) {
  throw FixtureError(FixtureError::Kind::Semantic, message);
}

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!node.IsMap()) semantic(node, where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) semantic(kv.first, "unknown key '" + key + "' in " + where);
  }
}

std::string req_string(const YAML::Node& parent, const char* key, const std::string& where) {
  const auto node = parent[key];
  if (!node) semantic(parent, where + " is missing '" + key + "'");
  if (!node.IsScalar()) semantic(node, where + "." + key + " must be a scalar");
  return node.as<std::string>();
}

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) semantic(node, where + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    semantic(node, where + " has an invalid value '" + node.Scalar() + "'");
  }
}

double number(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) semantic(node, where + " must be a number");
  if (auto v = text::parse_double(node.Scalar())) return *v;
  semantic(node, where + " must be a number, got '" + node.Scalar() + "'");
}

template <typename F>
void for_each_item(const YAML::Node& parent, const char* key, const std::string& where, F&& f) {
  const auto list = parent[key];
  if (!list || list.IsNull()) return;
  if (!list.IsSequence()) semantic(list, where + "." + key + " must be a list");
  std::size_t i = 0;
  for (const auto& item : list) f(item, where + "." + key + "[" + std::to_string(i++) + "]");
}

MetricSeriesSpec parse_metric(const YAML::Node& node, const std::string& where) {
  check_keys(node, {"metric_name", "labels", "samples", "generator"}, where);
  MetricSeriesSpec spec;
  spec.metric_name = req_string(node, "metric_name", where);
  if (const auto labels = node["labels"]; labels && !labels.IsNull()) {
    if (!labels.IsMap()) semantic(labels, where + ".labels must be a mapping");
    for (const auto& kv : labels) {
      spec.labels[kv.first.as<std::string>()] = scalar_as<std::string>(kv.second, where + ".labels");
    }
  }
  const auto samples = node["samples"];
  const auto generator = node["generator"];
  if (samples && generator) semantic(node, where + " declares both samples and generator");
  if (!samples && !generator) semantic(node, where + " needs either samples or generator");
  if (samples) {
    if (!samples.IsSequence()) semantic(samples, where + ".samples must be a list of [ts, value] pairs");
    std::vector<Sample> list;
    for (const auto& pair : samples) {
      if (!pair.IsSequence() || pair.size() != 2) semantic(pair, where + ".samples entries must be [ts, value]");
      list.push_back({number(pair[0], where + ".samples ts"), number(pair[1], where + ".samples value")});
    }
    spec.source = std::move(list);
  } else {
    const auto gw = where + ".generator";
    check_keys(generator, {"kind", "start_ts", "end_ts", "step_s", "rate_per_s", "jitter_seed"}, gw);
    const auto kind = req_string(generator, "kind", gw);
    if (kind != "counter") semantic(generator["kind"], gw + ".kind must be 'counter'");
    CounterGenerator g;
    auto field = [&](const char* key) {
      if (!generator[key]) semantic(generator, gw + " is missing '" + key + "'");
      return number(generator[key], gw + "." + key);
    };
    g.start_ts = field("start_ts");
    g.end_ts = field("end_ts");
    g.step_s = field("step_s");
    g.rate_per_s = field("rate_per_s");
    g.jitter_seed = generator["jitter_seed"] ? scalar_as<std::uint64_t>(generator["jitter_seed"], gw + ".jitter_seed") : 0;
    spec.source = g;
  }
  return spec;
}

Namespace parse_namespace(const YAML::Node& node, const std::string& where) {
  check_keys(node, {"name", "operators", "pods", "services", "metrics"}, where);
  Namespace ns;
  ns.name = req_string(node, "name", where);
  for_each_item(node, "operators", where, [&](const YAML::Node& op, const std::string& w) {
    check_keys(op, {"name", "version", "status"}, w);
    ns.operators.push_back({req_string(op, "name", w), req_string(op, "version", w), req_string(op, "status", w)});
  });
  for_each_item(node, "pods", where, [&](const YAML::Node& pod, const std::string& w) {
    check_keys(pod, {"name", "phase", "services"}, w);
    PodInfo info;
    info.name = req_string(pod, "name", w);
    try {
      info.phase = parse_pod_phase(req_string(pod, "phase", w));
    } catch (const std::invalid_argument& e) {
      semantic(pod["phase"], w + ": " + e.what());
    }
    if (const auto refs = pod["services"]; refs && !refs.IsNull()) {
      if (!refs.IsSequence()) semantic(refs, w + ".services must be a list");
      for (const auto& r : refs) info.service_refs.push_back(scalar_as<std::string>(r, w + ".services"));
    }
    ns.pods.push_back(std::move(info));
  });
  for_each_item(node, "services", where, [&](const YAML::Node& svc, const std::string& w) {
    check_keys(svc, {"name", "ports", "route"}, w);
    ServiceInfo info;
    info.name = req_string(svc, "name", w);
    if (svc["route"]) info.route = scalar_as<std::string>(svc["route"], w + ".route");
    for_each_item(svc, "ports", w, [&](const YAML::Node& p, const std::string& pw) {
      check_keys(p, {"port", "name", "protocol"}, pw);
      PortInfo port;
      if (!p["port"]) semantic(p, pw + " is missing 'port'");
      port.port = scalar_as<int>(p["port"], pw + ".port");
      if (port.port < 1 || port.port > 65535) semantic(p["port"], pw + ".port must be in 1..65535");
      if (p["name"] && !p["name"].IsNull()) port.name = scalar_as<std::string>(p["name"], pw + ".name");
      if (p["protocol"]) {
        try {
          port.protocol = parse_protocol(scalar_as<std::string>(p["protocol"], pw + ".protocol"));
        } catch (const std::invalid_argument& e) {
          semantic(p["protocol"], pw + ": " + e.what());
        }
      }
      info.ports.push_back(std::move(port));
    });
    ns.services.push_back(std::move(info));
  });
  for_each_item(node, "metrics", where, [&](const YAML::Node& m, const std::string& w) {
    ns.metrics.push_back(parse_metric(m, w));
  });
  return ns;
}

const std::regex& metric_name_pattern() {
  static const std::regex re("[A-Za-z_:][A-Za-z0-9_:]*");
  return re;
}

}  // namespace

void validate_fixture(const ClusterFixture& fixture) {
  std::set<std::string> ns_names;
  for (const auto& ns : fixture.namespaces) {
    if (ns.name.empty()) semantic("namespace with empty name");
    if (!ns_names.insert(ns.name).second) semantic("duplicate namespace '" + ns.name + "'");
    const auto where = "namespace '" + ns.name + "'";

    std::set<std::string> seen;
    for (const auto& op : ns.operators) {
      if (!seen.insert(op.name).second) semantic(where + ": duplicate operator '" + op.name + "'");
    }
    seen.clear();
    for (const auto& svc : ns.services) {
      if (svc.name.empty()) semantic(where + ": service with empty name");
      if (!seen.insert(svc.name).second) semantic(where + ": duplicate service '" + svc.name + "'");
      for (const auto& p : svc.ports) {
        if (p.port < 1 || p.port > 65535) {
          semantic(where + ": service '" + svc.name + "' has invalid port " + std::to_string(p.port));
        }
      }
    }
    const auto services = seen;
    seen.clear();
    for (const auto& pod : ns.pods) {
      if (!seen.insert(pod.name).second) semantic(where + ": duplicate pod '" + pod.name + "'");
      for (const auto& ref : pod.service_refs) {
        if (!services.count(ref)) {
          semantic(where + ": pod '" + pod.name + "' references unknown service '" + ref + "'");
        }
      }
    }
    for (const auto& m : ns.metrics) {
      const auto mw = where + ": metric '" + m.metric_name + "'";
      if (!std::regex_match(m.metric_name, metric_name_pattern())) semantic(mw + " has an invalid name");
      const auto label = m.labels.find("namespace");
      if (label == m.labels.end() || label->second != ns.name) {
        semantic(mw + " must carry label namespace=\"" + ns.name + "\"");
      }
      if (const auto* samples = std::get_if<std::vector<Sample>>(&m.source)) {
        for (std::size_t i = 1; i < samples->size(); ++i) {
          if (!((*samples)[i].timestamp > (*samples)[i - 1].timestamp)) {
            semantic(mw + " has non-increasing sample timestamps at index " + std::to_string(i));
          }
        }
      } else {
        const auto& g = std::get<CounterGenerator>(m.source);
        if (!(g.step_s > 0)) semantic(mw + ": generator step_s must be positive");
        if (g.end_ts < g.start_ts) semantic(mw + ": generator end_ts precedes start_ts");
        if (g.rate_per_s < 0) semantic(mw + ": generator rate_per_s must be nonnegative");
        if ((g.end_ts - g.start_ts) / g.step_s > 5e6) semantic(mw + ": generator would exceed 5M samples");
      }
    }
  }
}

ClusterFixture load_fixture(std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(source));
  } catch (const YAML::ParserException& e) {
    throw FixtureError(FixtureError::Kind::Syntax, e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  ClusterFixture fixture;
  if (root.IsNull()) return fixture;
  try {
    check_keys(root, {"namespaces"}, "fixture");
    for_each_item(root, "namespaces", "fixture", [&](const YAML::Node& ns, const std::string& w) {
      fixture.namespaces.push_back(parse_namespace(ns, w));
    });
  } catch (const YAML::Exception& e) {
    throw FixtureError(FixtureError::Kind::Semantic, e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  validate_fixture(fixture);
  return fixture;
}

ClusterFixture load_fixture_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError(FixtureError::Kind::Syntax, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_fixture(ss.str());
}

std::string_view builtin_fixture_source() { return resources::require("fixtures/demo.yaml"); }

ClusterFixture builtin_fixture() {
  static const ClusterFixture fixture = load_fixture(builtin_fixture_source());
  return fixture;
}

std::string serialize_fixture(const ClusterFixture& fixture) {
  YAML::Emitter out;
  auto num = [](double v) { return text::shortest(v); };
  out << YAML::BeginMap << YAML::Key << "namespaces" << YAML::Value << YAML::BeginSeq;
  for (const auto& ns : fixture.namespaces) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << ns.name;
    out << YAML::Key << "operators" << YAML::Value << YAML::BeginSeq;
    for (const auto& op : ns.operators) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << op.name
          << YAML::Key << "version" << YAML::Value << YAML::DoubleQuoted << op.version << YAML::Key << "status"
          << YAML::Value << YAML::DoubleQuoted << op.status << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::Key << "pods" << YAML::Value << YAML::BeginSeq;
    for (const auto& pod : ns.pods) {
      out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << pod.name << YAML::Key
          << "phase" << YAML::Value << to_string(pod.phase) << YAML::Key << "services" << YAML::Value << YAML::Flow
          << YAML::BeginSeq;
      for (const auto& ref : pod.service_refs) out << YAML::DoubleQuoted << ref;
      out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
    for (const auto& svc : ns.services) {
      out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << svc.name << YAML::Key
          << "ports" << YAML::Value << YAML::BeginSeq;
      for (const auto& p : svc.ports) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "port" << YAML::Value << p.port;
        if (!p.name.empty()) out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << p.name;
        out << YAML::Key << "protocol" << YAML::Value << to_string(p.protocol) << YAML::EndMap;
      }
      out << YAML::EndSeq << YAML::Key << "route" << YAML::Value << YAML::DoubleQuoted << svc.route << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::Key << "metrics" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : ns.metrics) {
      out << YAML::BeginMap << YAML::Key << "metric_name" << YAML::Value << m.metric_name << YAML::Key << "labels"
          << YAML::Value << YAML::Flow << YAML::BeginMap;
      for (const auto& [k, v] : m.labels) out << YAML::Key << k << YAML::Value << YAML::DoubleQuoted << v;
      out << YAML::EndMap;
      if (const auto* samples = std::get_if<std::vector<Sample>>(&m.source)) {
        out << YAML::Key << "samples" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : *samples) {
          out << YAML::Flow << YAML::BeginSeq << num(s.timestamp) << num(s.value) << YAML::EndSeq;
        }
        out << YAML::EndSeq;
      } else {
        const auto& g = std::get<CounterGenerator>(m.source);
        out << YAML::Key << "generator" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "kind"
            << YAML::Value << "counter" << YAML::Key << "start_ts" << YAML::Value << num(g.start_ts) << YAML::Key
            << "end_ts" << YAML::Value << num(g.end_ts) << YAML::Key << "step_s" << YAML::Value << num(g.step_s)
            << YAML::Key << "rate_per_s" << YAML::Value << num(g.rate_per_s) << YAML::Key << "jitter_seed"
            << YAML::Value << g.jitter_seed << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<Sample> materialize(const MetricSeriesSpec& spec) {
  if (const auto* samples = std::get_if<std::vector<Sample>>(&spec.source)) return *samples;
  const auto& g = std::get<CounterGenerator>(spec.source);
  std::vector<Sample> out;
  if (!(g.step_s > 0) || g.end_ts < g.start_ts) return out;
  const auto steps = static_cast<std::size_t>(std::floor((g.end_ts - g.start_ts) / g.step_s + 1e-9));
  out.reserve(steps + 1);
  std::mt19937_64 rng(g.jitter_seed);
  double value = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    if (i > 0) {
      // 53 high bits -> [0, 1); portable across standard libraries.
      const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
      value += std::round(g.rate_per_s * g.step_s * (0.5 + u));
    }
    out.push_back({g.start_ts + static_cast<double>(i) * g.step_s, value});
  }
  return out;
}

}  // namespace aiops
