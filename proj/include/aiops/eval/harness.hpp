#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "aiops/agent/runner.hpp"
#include "aiops/domain/types.hpp"
#include "aiops/llm/backend.hpp"
#include "aiops/sim/cluster.hpp"
#include "aiops/tools/rag.hpp"
#include "aiops/tools/registry.hpp"

namespace aiops::eval {

struct SuiteRunConfig {
  std::vector<QueryCase> suite;
  std::vector<std::shared_ptr<llm::CompletionBackend>> backends;
  int repetitions = 10;
  std::uint64_t seed = 0;
  int parallel_workers = 1;
  agent::MemoryPolicy memory;
  agent::AgentLimits limits;
  tools::PlotFormat plot_format = tools::PlotFormat::Png;
  /// Called once per finished record, from worker threads, serialised.
  std::function<void(const RunRecord&)> on_record;

  /// Throws std::invalid_argument for an empty suite or backend list,
  /// repetitions < 1, workers < 1 or duplicate backend ids.
  void validate() const;
};

/// Runs backend x query x repetition. Records come back backend-major, then
/// query, then repetition, whatever the worker count. Repetitions of one
/// query on one backend always run sequentially on one worker. Throws
/// ValidatorConfigError or std::invalid_argument before any run on
/// configuration problems.
std::vector<RunRecord> run_benchmark(const SuiteRunConfig& config, const sim::SimState& state,
                                     const tools::ToolRegistry& registry, const tools::RagCorpus& corpus);

/// Nearest rank: element ceil(p/100 * n) (1-based) of the sorted values.
/// Throws std::invalid_argument for empty input or p outside (0, 100].
double percentile(std::vector<double> values, double p);

/// Per (query, backend) cells and per-backend SR/AR rollups. Categories come
/// from `suite`; queries missing from it count as SR. Throws
/// std::invalid_argument for no records.
BenchmarkReport aggregate(const std::vector<RunRecord>& records, const std::vector<QueryCase>& suite);

enum class ReportFormat { Csv, Markdown, Json };

std::set<ReportFormat> parse_report_formats(std::string_view list);

/// Writes rq1_accuracy, rq2_latency and rq3_tokens in each format; returns
/// the written paths. Throws std::runtime_error when the directory cannot
/// be written.
std::vector<std::filesystem::path> emit_reports(const BenchmarkReport& report, const std::filesystem::path& out_dir,
                                                const std::set<ReportFormat>& formats);

std::string format_accuracy(double pct);
std::string format_seconds(double s);
std::string format_tokens(double t);

}  // namespace aiops::eval
