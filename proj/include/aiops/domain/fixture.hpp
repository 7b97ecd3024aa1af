#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/domain/types.hpp"

namespace aiops {

/// Raised by load_fixture. Syntax errors carry the 1-based position reported
/// by the YAML parser; semantic errors carry the offending path instead.
class FixtureError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Semantic };

  FixtureError(Kind kind, std::string message, int line = 0, int column = 0);

  Kind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

/// Parses and validates a fixture document (YAML, JSON accepted).
ClusterFixture load_fixture(std::string_view source);
ClusterFixture load_fixture_file(const std::filesystem::path& path);

/// The bundled demo cluster.
ClusterFixture builtin_fixture();
std::string_view builtin_fixture_source();

/// Emits a YAML document that load_fixture() reads back to an equal fixture.
std::string serialize_fixture(const ClusterFixture& fixture);

/// Checks every fixture invariant; throws FixtureError(Semantic) on the first
/// violation.
void validate_fixture(const ClusterFixture& fixture);

/// Expands a series spec to its sample list. Counter generators are
/// deterministic in `jitter_seed`: each step adds round(rate_per_s * step_s * u)
/// with u drawn from [0.5, 1.5) by a mt19937_64 stream, starting from 0.
std::vector<Sample> materialize(const MetricSeriesSpec& spec);

}  // namespace aiops
