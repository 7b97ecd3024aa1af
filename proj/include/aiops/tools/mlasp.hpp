#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>

namespace aiops::tools {

/// Tunable parameters of the load-tested application and their bounds.
struct CapacityParams {
  int async_response_threads = 10;  // [10, 400]
  double container_cpu = 0.5;       // [0.5, 4.0], 0.01 resolution
  int container_memory_mb = 256;    // [256, 4096]
  int jvm_heap_mb = 128;            // [128, 2048]

  friend bool operator==(const CapacityParams&, const CapacityParams&) = default;
};

struct CapacityBounds {
  static constexpr int kThreadsMin = 10, kThreadsMax = 400;
  static constexpr double kCpuMin = 0.5, kCpuMax = 4.0;
  static constexpr int kMemoryMin = 256, kMemoryMax = 4096;
  static constexpr int kHeapMin = 128, kHeapMax = 2048;
};

bool within_bounds(const CapacityParams& p);

/// Closed-form throughput model standing in for a trained predictor:
/// 12 ln(1 + threads) + 35 cpu + 0.04 heap + 0.01 memory.
double surrogate_kpi(const CapacityParams& p);

struct CapacityConfig {
  CapacityParams params;
  double predicted_kpi = 0.0;
};

/// Uniform draws over the bounds from a mt19937_64 stream. The mapping from
/// raw 64-bit outputs is explicit so a seed yields the same sequence with any
/// standard library.
class ConfigSampler {
 public:
  explicit ConfigSampler(std::uint64_t seed) : rng_(seed) {}
  CapacityParams next();

 private:
  double unit();
  int integer(int lo, int hi);
  std::mt19937_64 rng_;
};

/// [target (1 - p/100), target (1 + p/100)]
std::pair<double, double> acceptance_band(double target_kpi, double precision_pct);

struct MlaspResult {
  CapacityConfig config;
  bool within_precision = false;
  int epochs_searched = 0;
  double band_low = 0.0;
  double band_high = 0.0;
};

/// Draws up to `epochs` configurations and returns the first whose predicted
/// KPI lies in the acceptance band; otherwise the closest draw by absolute
/// error with within_precision = false. Throws std::invalid_argument unless
/// target > 0, precision >= 0 and epochs >= 1.
MlaspResult mlasp_search(double target_kpi, double precision_pct, int epochs, std::uint64_t seed);

std::string render(const MlaspResult& result);

}  // namespace aiops::tools
