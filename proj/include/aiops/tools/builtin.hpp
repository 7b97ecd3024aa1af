#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/sim/cluster.hpp"

// Observation renderings of the cluster tools.
namespace aiops::tools {

namespace action {
inline constexpr std::string_view kMlasp = "Generate_MLASP_Parameter_Configurations";
inline constexpr std::string_view kRag = "Search_OpenShift_AI_Documentation";
inline constexpr std::string_view kTime = "Get_timestamp_and_time_ISO";
inline constexpr std::string_view kOperators = "List_Operators_In_OpenShift_Namespace";
inline constexpr std::string_view kPods = "Summarize_Pods_Information_In_OpenShift_Namespace";
inline constexpr std::string_view kServices = "Summarize_Services_Information_In_OpenShift_Namespace";
inline constexpr std::string_view kMetricNames = "List_Prometheus_Metric_Names_Using_A_Filter";
inline constexpr std::string_view kMetricRange = "List_Prometheus_Metric_Data_Range";
inline constexpr std::string_view kPlot = "File_create_plot_irate";
}  // namespace action

std::string_view action_name(ToolId id);

std::string render_operators(std::string_view ns, const std::vector<OperatorInfo>& ops);
std::string render_pod_summary(const sim::PodSummary& summary);
std::string render_services(std::string_view ns, const std::vector<ServiceInfo>& services);
std::string render_metric_names(const std::vector<std::string>& names);
std::string render_samples(std::string_view metric, std::span<const Sample> samples);

/// `timestamp,value` header then one row per sample: floored integer
/// timestamp, shortest round-trip value, LF line endings, no trailing newline.
std::string render_csv(std::span<const Sample> samples);

}  // namespace aiops::tools
