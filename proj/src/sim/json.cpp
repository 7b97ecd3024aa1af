#include "aiops/sim/json.hpp"

#include "aiops/util/text.hpp"

namespace aiops {

void to_json(nlohmann::json& j, const OperatorInfo& op) {
  j = {{"name", op.name}, {"version", op.version}, {"status", op.status}};
}

void to_json(nlohmann::json& j, const PortInfo& port) {
  j = {{"port", port.port}, {"name", port.name}, {"protocol", to_string(port.protocol)}};
}

void to_json(nlohmann::json& j, const ServiceInfo& svc) {
  j = {{"name", svc.name}, {"ports", svc.ports}, {"route", svc.route}};
}

namespace sim {

void to_json(nlohmann::json& j, const PodDetail& pod) { j = {{"name", pod.name}, {"services", pod.services}}; }

void to_json(nlohmann::json& j, const PodSummary& summary) {
  nlohmann::json counters = nlohmann::json::object();
  for (const auto& [phase, count] : summary.counters) counters[to_string(phase)] = count;
  j = {{"namespace", summary.namespace_name}, {"pod_counters", counters}, {"running_pods", summary.running}};
}

nlohmann::json label_values_response(const std::vector<std::string>& names) {
  return {{"status", "success"}, {"data", names}};
}

nlohmann::json query_range_response(std::string_view metric, const RangeResult& range) {
  nlohmann::json result = nlohmann::json::array();
  if (range.metric_known) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& s : range.samples) values.push_back({s.timestamp, text::shortest(s.value)});
    result.push_back({{"metric", {{"__name__", std::string(metric)}}}, {"values", std::move(values)}});
  }
  return {{"status", "success"}, {"data", {{"resultType", "matrix"}, {"result", std::move(result)}}}};
}

}  // namespace sim
}  // namespace aiops
