#include "aiops/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "aiops/domain/suite.hpp"
#include "aiops/eval/validator.hpp"
#include "aiops/util/text.hpp"

namespace aiops::eval {

void SuiteRunConfig::validate() const {
  if (suite.empty()) throw std::invalid_argument("suite is empty");
  if (backends.empty()) throw std::invalid_argument("no backends configured");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (parallel_workers < 1) throw std::invalid_argument("parallel_workers must be at least 1");
  std::set<std::string> ids;
  for (const auto& b : backends) {
    if (!b) throw std::invalid_argument("null backend");
    if (!ids.insert(b->id()).second) throw std::invalid_argument("duplicate backend id '" + b->id() + "'");
  }
  limits.validate();
}

namespace {

RunRecord run_one(const SuiteRunConfig& config, llm::CompletionBackend& backend, const QueryCase& query, int rep,
                  const sim::SimState& state, const tools::ToolRegistry& registry, const tools::RagCorpus& corpus,
                  agent::ConversationMemory* memory) {
  sim::Clock clock(state.clock_spec());
  tools::ToolContext ctx{state, clock, corpus, config.plot_format, config.seed};
  agent::AgentOptions options;
  options.limits = config.limits;
  options.memory = config.memory;
  if (memory) options.memory_text = memory->render(config.memory);

  RunRecord rec;
  rec.query_id = query.id;
  rec.backend_id = backend.id();
  rec.repetition = rep;
  const auto start = std::chrono::steady_clock::now();
  auto run = agent::run_agent(backend, registry, ctx, query.text, options);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto verdict = validate(query, run, state, registry, clock.first_reading());
  if (memory && run.outcome == agent::RunOutcome::Finished) memory->add(query.text, run.final_answer);
  rec.prompt_tokens = run.prompt_tokens;
  rec.completion_tokens = run.completion_tokens;
  rec.total_tokens = run.prompt_tokens + run.completion_tokens;
  rec.tokens_approximated = run.tokens_approximated;
  rec.success = verdict.success;
  rec.failure_kind = verdict.failure_kind;
  rec.expected_failure = verdict.expected_failure;
  rec.trace = std::move(run.trace);
  rec.final_answer = std::move(run.final_answer);
  return rec;
}

}  // namespace

std::vector<RunRecord> run_benchmark(const SuiteRunConfig& config, const sim::SimState& state,
                                     const tools::ToolRegistry& registry, const tools::RagCorpus& corpus) {
  config.validate();
  check_suite_references(config.suite, state, registry);

  const auto nq = config.suite.size();
  const auto reps = static_cast<std::size_t>(config.repetitions);
  std::vector<RunRecord> records(config.backends.size() * nq * reps);
  std::mutex emit_mu;
  const auto store = [&](std::size_t index, RunRecord rec) {
    records[index] = std::move(rec);
    if (config.on_record) {
      std::lock_guard lock(emit_mu);
      config.on_record(records[index]);
    }
  };

  // With memory on, earlier answers feed later prompts, so each backend's
  // queries run in suite order on one worker; otherwise the unit of work is
  // one (backend, query) cell.
  const bool per_backend = config.memory.enabled;
  const std::size_t units = per_backend ? config.backends.size() : config.backends.size() * nq;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (auto u = next++; u < units; u = next++) {
      const auto b = per_backend ? u : u / nq;
      auto& backend = *config.backends[b];
      if (per_backend) {
        std::vector<agent::ConversationMemory> memories(reps);
        for (std::size_t q = 0; q < nq; ++q) {
          for (std::size_t r = 0; r < reps; ++r) {
            store((b * nq + q) * reps + r, run_one(config, backend, config.suite[q], static_cast<int>(r + 1), state,
                                                   registry, corpus, &memories[r]));
          }
        }
      } else {
        const auto q = u % nq;
        for (std::size_t r = 0; r < reps; ++r) {
          store((b * nq + q) * reps + r,
                run_one(config, backend, config.suite[q], static_cast<int>(r + 1), state, registry, corpus, nullptr));
        }
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallel_workers), units);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty list");
  if (!(p > 0 && p <= 100)) throw std::invalid_argument("percentile p must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

BenchmarkReport aggregate(const std::vector<RunRecord>& records, const std::vector<QueryCase>& suite) {
  if (records.empty()) throw std::invalid_argument("no records to aggregate");
  BenchmarkReport report;
  const auto note = [](std::vector<std::string>& ids, const std::string& id) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  };
  for (const auto& r : records) {
    note(report.query_ids, r.query_id);
    note(report.backend_ids, r.backend_id);
    report.tokens_approximated[r.backend_id] = report.tokens_approximated[r.backend_id] || r.tokens_approximated;
  }
  for (const auto& q : report.query_ids) {
    for (const auto& b : report.backend_ids) {
      std::vector<double> seconds;
      double tokens = 0.0;
      std::map<FailureKind, int> failures;
      int expected = 0;
      ReportCell cell;
      cell.query_id = q;
      cell.backend_id = b;
      for (const auto& r : records) {
        if (r.query_id != q || r.backend_id != b) continue;
        ++cell.repetitions;
        cell.successes += r.success ? 1 : 0;
        seconds.push_back(r.wall_seconds);
        tokens += static_cast<double>(r.total_tokens);
        if (r.expected_failure) ++expected;
        else if (!r.success) ++failures[r.failure_kind];
      }
      if (cell.repetitions == 0) continue;
      // "expected failure" first, then failure kinds in enum order.
      std::vector<std::string> notes;
      if (expected > 0) notes.push_back("expected failure");
      for (const auto& [kind, n] : failures) notes.push_back(to_string(kind) + " x" + std::to_string(n));
      cell.annotation = text::join(notes, ", ");
      cell.accuracy_pct = 100.0 * cell.successes / cell.repetitions;
      cell.latency = {percentile(seconds, 50), percentile(seconds, 90), percentile(seconds, 100)};
      cell.avg_tokens = tokens / cell.repetitions;
      report.cells.push_back(std::move(cell));
    }
  }
  for (const auto& b : report.backend_ids) {
    for (const auto& cell : report.cells) {
      if (cell.backend_id != b) continue;
      const auto* q = find_query(suite, cell.query_id);
      auto& roll = report.rollups[b][q ? q->category : Category::SR];
      roll.accuracy_pct += cell.accuracy_pct;
      roll.p50_s += cell.latency.p50_s;
      roll.p90_s += cell.latency.p90_s;
      roll.max_s += cell.latency.max_s;
      roll.avg_tokens += cell.avg_tokens;
      ++roll.queries;
    }
    for (auto& [cat, roll] : report.rollups[b]) {
      const double n = roll.queries;
      roll.accuracy_pct /= n;
      roll.p50_s /= n;
      roll.p90_s /= n;
      roll.max_s /= n;
      roll.avg_tokens /= n;
    }
  }
  return report;
}

}  // namespace aiops::eval
