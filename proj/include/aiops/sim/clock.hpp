#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace aiops::sim {

/// How a run obtains "now". Fixed mode always answers the same instant;
/// sequence mode answers its timestamps in order and then repeats the last
/// one, which replays a recorded session whose clock advanced between calls.
struct ClockSpec {
  enum class Mode { System, Fixed, Sequence };

  Mode mode = Mode::System;
  std::vector<double> timestamps;

  static ClockSpec system() { return {}; }
  static ClockSpec fixed(double ts) { return {Mode::Fixed, {ts}}; }
  static ClockSpec sequence(std::vector<double> ts);

  /// "system", "fixed:<ts>" or "sequence:<ts>,<ts>,...".
  static ClockSpec parse(std::string_view text);
  std::string describe() const;
};

class Clock {
 public:
  explicit Clock(ClockSpec spec = {}) : spec_(std::move(spec)) {}
  Clock(const Clock&) = delete;
  Clock& operator=(const Clock&) = delete;

  double now();
  const ClockSpec& spec() const { return spec_; }

  /// Timestamp of the first now() call of this clock (taken lazily).
  double first_reading();

 private:
  ClockSpec spec_;
  std::atomic<std::size_t> cursor_{0};
  std::atomic<bool> has_first_{false};
  std::atomic<double> first_{0.0};
};

/// Broken-down wall time in an IANA zone.
struct LocalTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;
  int weekday = 4;  // 0 = Sunday
  long utc_offset_s = 0;
};

/// True when `zone` is "UTC" or names a zone in the system tz database.
bool is_known_zone(const std::string& zone);

/// Throws std::invalid_argument for unknown zones.
LocalTime to_local(std::int64_t epoch_seconds, const std::string& zone);

/// ISO 8601 with microseconds and numeric offset: 2024-11-01T18:36:08.411993-04:00
std::string iso8601_micro(double epoch_seconds, const std::string& zone);
/// ISO 8601 truncated to whole seconds, no offset: 2024-11-01T18:36:08
std::string iso8601_seconds(double epoch_seconds, const std::string& zone);
std::string date_string(double epoch_seconds, const std::string& zone);
std::string weekday_name(int weekday);

}  // namespace aiops::sim
