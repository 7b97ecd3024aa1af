#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/domain/types.hpp"
#include "aiops/sim/clock.hpp"

namespace aiops::sim {

struct MaterializedSeries {
  std::string metric_name;
  std::map<std::string, std::string> labels;
  std::vector<Sample> samples;
};

/// Immutable simulated cluster: the fixture plus every metric series
/// expanded to samples. Safe to share across concurrent runs.
class SimState {
 public:
  explicit SimState(ClusterFixture fixture, std::filesystem::path artifact_dir = "artifacts",
                    ClockSpec clock = ClockSpec::system(), std::string timezone = "UTC");

  const ClusterFixture& fixture() const { return fixture_; }
  const std::vector<MaterializedSeries>& series() const { return series_; }
  const std::filesystem::path& artifact_dir() const { return artifact_dir_; }
  const ClockSpec& clock_spec() const { return clock_; }
  const std::string& timezone() const { return timezone_; }

 private:
  ClusterFixture fixture_;
  std::vector<MaterializedSeries> series_;
  std::filesystem::path artifact_dir_;
  ClockSpec clock_;
  std::string timezone_;
};

struct PodDetail {
  std::string name;
  std::vector<ServiceInfo> services;
};

struct PodSummary {
  std::string namespace_name;
  std::map<PodPhase, int> counters;  // every phase present, zero when absent
  std::vector<PodDetail> running;
};

struct RangeResult {
  std::vector<Sample> samples;
  bool metric_known = false;
};

std::vector<OperatorInfo> list_operators(const SimState& state, std::string_view ns);
PodSummary pod_summary(const SimState& state, std::string_view ns);
std::vector<ServiceInfo> service_summary(const SimState& state, std::string_view ns);

/// Sorted, de-duplicated names of series whose label `filter_name` equals
/// `filter_value`. Throws std::invalid_argument when filter_name is empty.
std::vector<std::string> metric_names(const SimState& state, std::string_view filter_name,
                                      std::string_view filter_value);

/// Samples of every series named `metric` with start <= t <= end, merged in
/// ascending timestamp order. Throws std::invalid_argument when start > end.
RangeResult range_samples(const SimState& state, std::string_view metric, double start, double end);

/// Per-pair counter rate: (v[i] - v[i-1]) / dt, or v[i] / dt after a counter
/// reset. Output point i carries the later timestamp. Throws
/// std::invalid_argument unless timestamps strictly increase.
std::vector<Sample> irate_points(std::span<const Sample> samples);

}  // namespace aiops::sim
