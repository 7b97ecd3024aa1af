#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "aiops/sim/clock.hpp"

namespace aiops::tools {

enum class TimeUnit { Seconds, Minutes, Hours, Days };

/// Throws std::invalid_argument for anything but seconds/minutes/hours/days.
TimeUnit parse_time_unit(std::string_view text);
double unit_seconds(TimeUnit unit);

struct TimeInfo {
  double timestamp = 0.0;
  std::string date_time_iso_format_string;
  std::string timezone;
};

/// `amount` empty means "now". The offset is subtracted when `ago`, added
/// otherwise. Throws std::invalid_argument for a negative amount.
TimeInfo time_info(std::optional<double> amount, TimeUnit unit, bool ago, sim::Clock& clock,
                   const std::string& zone);

/// `timestamp = ... date_time_iso_format_string = '...' timezone = '...'`
std::string render(const TimeInfo& info);

}  // namespace aiops::tools
