#include "aiops/sim/cluster.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "aiops/domain/fixture.hpp"

namespace aiops::sim {

SimState::SimState(ClusterFixture fixture, std::filesystem::path artifact_dir, ClockSpec clock, std::string timezone)
    : fixture_(std::move(fixture)),
      artifact_dir_(std::move(artifact_dir)),
      clock_(std::move(clock)),
      timezone_(std::move(timezone)) {
  validate_fixture(fixture_);
  if (!is_known_zone(timezone_)) throw std::invalid_argument("unknown time zone '" + timezone_ + "'");
  for (const auto& ns : fixture_.namespaces) {
    for (const auto& spec : ns.metrics) {
      series_.push_back({spec.metric_name, spec.labels, materialize(spec)});
    }
  }
}

std::vector<OperatorInfo> list_operators(const SimState& state, std::string_view ns) {
  if (const auto* n = state.fixture().find_namespace(ns)) return n->operators;
  return {};
}

PodSummary pod_summary(const SimState& state, std::string_view ns) {
  PodSummary summary;
  summary.namespace_name = std::string(ns);
  for (auto phase : {PodPhase::Running, PodPhase::Succeeded, PodPhase::Pending, PodPhase::Failed}) {
    summary.counters[phase] = 0;
  }
  const auto* n = state.fixture().find_namespace(ns);
  if (!n) return summary;
  for (const auto& pod : n->pods) {
    ++summary.counters[pod.phase];
    if (pod.phase != PodPhase::Running) continue;
    PodDetail detail{pod.name, {}};
    for (const auto& ref : pod.service_refs) {
      for (const auto& svc : n->services) {
        if (svc.name == ref) detail.services.push_back(svc);
      }
    }
    summary.running.push_back(std::move(detail));
  }
  return summary;
}

std::vector<ServiceInfo> service_summary(const SimState& state, std::string_view ns) {
  if (const auto* n = state.fixture().find_namespace(ns)) return n->services;
  return {};
}

std::vector<std::string> metric_names(const SimState& state, std::string_view filter_name,
                                      std::string_view filter_value) {
  if (filter_name.empty()) throw std::invalid_argument("filter_name must not be empty");
  std::set<std::string> names;
  for (const auto& s : state.series()) {
    const auto label = s.labels.find(std::string(filter_name));
    if (label != s.labels.end() && label->second == filter_value) names.insert(s.metric_name);
  }
  return {names.begin(), names.end()};
}

RangeResult range_samples(const SimState& state, std::string_view metric, double start, double end) {
  if (start > end) throw std::invalid_argument("start must not exceed end");
  RangeResult result;
  for (const auto& s : state.series()) {
    if (s.metric_name != metric) continue;
    result.metric_known = true;
    const auto lo = std::lower_bound(s.samples.begin(), s.samples.end(), start,
                                     [](const Sample& a, double t) { return a.timestamp < t; });
    const auto hi = std::upper_bound(s.samples.begin(), s.samples.end(), end,
                                     [](double t, const Sample& a) { return t < a.timestamp; });
    const auto mid = result.samples.insert(result.samples.end(), lo, hi);
    std::inplace_merge(result.samples.begin(), mid, result.samples.end(),
                       [](const Sample& a, const Sample& b) { return a.timestamp < b.timestamp; });
  }
  return result;
}

std::vector<Sample> irate_points(std::span<const Sample> samples) {
  std::vector<Sample> out;
  if (samples.size() < 2) return out;
  out.reserve(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& prev = samples[i - 1];
    const auto& cur = samples[i];
    const double dt = cur.timestamp - prev.timestamp;
    if (!(dt > 0)) {
      throw std::invalid_argument("sample timestamps must be strictly increasing (index " + std::to_string(i) + ")");
    }
    const double delta = cur.value >= prev.value ? cur.value - prev.value : cur.value;
    out.push_back({cur.timestamp, delta / dt});
  }
  return out;
}

}  // namespace aiops::sim
