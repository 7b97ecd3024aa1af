#include "aiops/tools/mlasp.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

#include "aiops/util/text.hpp"

namespace aiops::tools {

bool within_bounds(const CapacityParams& p) {
  using B = CapacityBounds;
  return p.async_response_threads >= B::kThreadsMin && p.async_response_threads <= B::kThreadsMax &&
         p.container_cpu >= B::kCpuMin && p.container_cpu <= B::kCpuMax && p.container_memory_mb >= B::kMemoryMin &&
         p.container_memory_mb <= B::kMemoryMax && p.jvm_heap_mb >= B::kHeapMin && p.jvm_heap_mb <= B::kHeapMax;
}

double surrogate_kpi(const CapacityParams& p) {
  return 12.0 * std::log(1.0 + p.async_response_threads) + 35.0 * p.container_cpu + 0.04 * p.jvm_heap_mb +
         0.01 * p.container_memory_mb;
}

double ConfigSampler::unit() { return static_cast<double>(rng_() >> 11) * 0x1p-53; }

int ConfigSampler::integer(int lo, int hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return lo + static_cast<int>(std::floor(unit() * span));
}

CapacityParams ConfigSampler::next() {
  using B = CapacityBounds;
  CapacityParams p;
  p.async_response_threads = integer(B::kThreadsMin, B::kThreadsMax);
  // CPU in hundredths of a core.
  p.container_cpu = integer(static_cast<int>(B::kCpuMin * 100), static_cast<int>(B::kCpuMax * 100)) / 100.0;
  p.container_memory_mb = integer(B::kMemoryMin, B::kMemoryMax);
  p.jvm_heap_mb = integer(B::kHeapMin, B::kHeapMax);
  return p;
}

std::pair<double, double> acceptance_band(double target_kpi, double precision_pct) {
  return {target_kpi * (1.0 - precision_pct / 100.0), target_kpi * (1.0 + precision_pct / 100.0)};
}

MlaspResult mlasp_search(double target_kpi, double precision_pct, int epochs, std::uint64_t seed) {
  if (!(target_kpi > 0)) throw std::invalid_argument("target_kpi must be positive");
  if (!(precision_pct >= 0)) throw std::invalid_argument("precision_pct must not be negative");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");

  MlaspResult result;
  std::tie(result.band_low, result.band_high) = acceptance_band(target_kpi, precision_pct);
  ConfigSampler sampler(seed);
  double best_error = 0.0;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    CapacityConfig candidate;
    candidate.params = sampler.next();
    candidate.predicted_kpi = surrogate_kpi(candidate.params);
    result.epochs_searched = epoch;
    if (candidate.predicted_kpi >= result.band_low && candidate.predicted_kpi <= result.band_high) {
      result.config = candidate;
      result.within_precision = true;
      return result;
    }
    const double error = std::abs(candidate.predicted_kpi - target_kpi);
    if (epoch == 1 || error < best_error) {
      best_error = error;
      result.config = candidate;
    }
  }
  return result;
}

std::string render(const MlaspResult& r) {
  const auto& p = r.config.params;
  return std::string("within_precision = ") + (r.within_precision ? "True" : "False") +
         " predicted_kpi = " + text::fixed(r.config.predicted_kpi, 3) + " configuration = {async_response_threads = " +
         std::to_string(p.async_response_threads) + ", container_cpu = " + text::shortest(p.container_cpu) +
         ", container_memory_mb = " + std::to_string(p.container_memory_mb) +
         ", jvm_heap_mb = " + std::to_string(p.jvm_heap_mb) + "} acceptance_band = [" + text::fixed(r.band_low, 3) +
         ", " + text::fixed(r.band_high, 3) + "] epochs_searched = " + std::to_string(r.epochs_searched);
}

}  // namespace aiops::tools
