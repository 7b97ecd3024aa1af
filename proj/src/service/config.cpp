#include <algorithm>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "aiops/llm/factory.hpp"
#include "aiops/llm/scripted.hpp"
#include "aiops/service/service.hpp"
#include "aiops/sim/clock.hpp"

namespace aiops::service {

void ServiceConfig::validate() const {
  if (host.empty()) throw std::invalid_argument("bind address is empty");
  if (port < 1 || port > 65535) throw std::invalid_argument("port out of range");
  if (artifact_dir.empty()) throw std::invalid_argument("artifact_dir is empty");
  if (backend_ids.empty()) throw std::invalid_argument("no backends configured");
  if (max_concurrent_runs < 1) throw std::invalid_argument("max_concurrent_runs must be at least 1");
  limits.validate();
  if (memory.max_turns < 0) throw std::invalid_argument("memory.max_turns must not be negative");
  sim::ClockSpec::parse(clock);
}

void ServiceConfig::validate_backend_ids() const {
  for (const auto& id : backend_ids) {
    if (llm::is_scripted_id(id)) continue;
    bool found = false;
    for (const auto& e : endpoints) found = found || e.id == id;
    if (!found) throw std::invalid_argument("backend '" + id + "' has no endpoint configuration");
  }
}

namespace {

template <typename T>
void read_opt(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

}  // namespace

ServiceConfig load_service_config(std::string_view yaml_text) {
  ServiceConfig c;
  try {
    const auto root = YAML::Load(std::string(yaml_text));
    if (root.IsNull()) return c;
    if (!root.IsMap()) throw std::invalid_argument("service config must be a map");
    read_opt(root, "bind", c.host);
    read_opt(root, "port", c.port);
    std::string dir = c.artifact_dir.string();
    read_opt(root, "artifact_dir", dir);
    c.artifact_dir = dir;
    read_opt(root, "fixture", c.fixture);
    read_opt(root, "clock", c.clock);
    read_opt(root, "timezone", c.timezone);
    if (root["plot_format"]) c.plot_format = tools::parse_plot_format(root["plot_format"].as<std::string>());
    read_opt(root, "max_concurrent_runs", c.max_concurrent_runs);
    if (root["backends"]) {
      const auto& list = root["backends"];
      if (!list.IsSequence()) throw std::invalid_argument("backends must be a list");
      c.backend_ids.clear();
      for (const auto& b : list) {
        if (!b.IsMap() || !b["id"]) throw std::invalid_argument("every backend needs an id");
        c.backend_ids.push_back(b["id"].as<std::string>());
      }
      YAML::Emitter out;
      out << list;
      c.endpoints = llm::parse_endpoints(out.c_str());
    }
    if (root["default_backend"]) {
      const auto def = root["default_backend"].as<std::string>();
      auto it = std::find(c.backend_ids.begin(), c.backend_ids.end(), def);
      if (it == c.backend_ids.end()) throw std::invalid_argument("default_backend '" + def + "' is not configured");
      std::rotate(c.backend_ids.begin(), it, it + 1);
    }
    const auto limits = root["limits"];
    read_opt(limits, "max_iterations", c.limits.max_iterations);
    read_opt(limits, "max_output_chars", c.limits.max_output_chars);
    read_opt(limits, "wall_timeout_s", c.limits.wall_timeout_s);
    read_opt(limits, "malformed_retry_budget", c.limits.malformed_retry_budget);
    const auto memory = root["memory"];
    read_opt(memory, "enabled", c.memory.enabled);
    read_opt(memory, "max_turns", c.memory.max_turns);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("service config: ") + e.what());
  }
  c.validate();
  c.validate_backend_ids();
  return c;
}

}  // namespace aiops::service
