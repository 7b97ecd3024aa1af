#pragma once

#include <nlohmann/json.hpp>

#include "aiops/sim/cluster.hpp"

namespace aiops {

void to_json(nlohmann::json& j, const OperatorInfo& op);
void to_json(nlohmann::json& j, const PortInfo& port);
void to_json(nlohmann::json& j, const ServiceInfo& svc);

namespace sim {

void to_json(nlohmann::json& j, const PodDetail& pod);
void to_json(nlohmann::json& j, const PodSummary& summary);

/// `{"status":"success","data":[names...]}`
nlohmann::json label_values_response(const std::vector<std::string>& names);

/// Prometheus matrix response for one metric; values rendered as strings.
nlohmann::json query_range_response(std::string_view metric, const RangeResult& range);

}  // namespace sim
}  // namespace aiops
