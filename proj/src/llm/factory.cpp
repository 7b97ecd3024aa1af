#include "aiops/llm/factory.hpp"

#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "aiops/llm/scripted.hpp"

namespace aiops::llm {

namespace {

template <typename T>
void read_opt(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

}  // namespace

std::vector<EndpointConfig> parse_endpoints(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("backend config: ") + e.what());
  }
  if (root.IsMap()) root = root["backends"];
  std::vector<EndpointConfig> out;
  if (!root || root.IsNull()) return out;
  if (!root.IsSequence()) throw std::invalid_argument("backend config: expected a list of backends");
  try {
    for (const auto& node : root) {
      if (!node.IsMap() || !node["id"]) throw std::invalid_argument("backend config: every entry needs an id");
      if (!node["base_url"]) continue;
      EndpointConfig c;
      c.id = node["id"].as<std::string>();
      c.base_url = node["base_url"].as<std::string>();
      read_opt(node, "model", c.model);
      read_opt(node, "token_env", c.token_env);
      read_opt(node, "timeout_s", c.timeout_s);
      read_opt(node, "requests_per_second", c.requests_per_second);
      read_opt(node, "max_retries", c.max_retries);
      read_opt(node, "backoff_s", c.backoff_s);
      c.validate();
      out.push_back(std::move(c));
    }
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("backend config: ") + e.what());
  }
  return out;
}

std::shared_ptr<CompletionBackend> make_backend(std::string_view id, const std::vector<EndpointConfig>& endpoints) {
  if (is_scripted_id(id)) return std::make_shared<ScriptedBackend>(make_scripted(id));
  for (const auto& e : endpoints) {
    if (e.id == id) return std::make_shared<HttpBackend>(e);
  }
  throw std::invalid_argument("unknown backend '" + std::string(id) + "'");
}

}  // namespace aiops::llm
