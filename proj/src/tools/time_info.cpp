#include "aiops/tools/time_info.hpp"

#include <stdexcept>

#include "aiops/util/text.hpp"

namespace aiops::tools {

TimeUnit parse_time_unit(std::string_view text) {
  if (text == "seconds") return TimeUnit::Seconds;
  if (text == "minutes") return TimeUnit::Minutes;
  if (text == "hours") return TimeUnit::Hours;
  if (text == "days") return TimeUnit::Days;
  throw std::invalid_argument("unknown time_metric '" + std::string(text) +
                              "' (expected seconds, minutes, hours or days)");
}

double unit_seconds(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds: return 1.0;
    case TimeUnit::Minutes: return 60.0;
    case TimeUnit::Hours: return 3600.0;
    case TimeUnit::Days: return 86400.0;
  }
  return 1.0;
}

TimeInfo time_info(std::optional<double> amount, TimeUnit unit, bool ago, sim::Clock& clock,
                   const std::string& zone) {
  if (amount && *amount < 0) throw std::invalid_argument("time_value must not be negative");
  const double base = clock.now();
  const double offset = amount ? *amount * unit_seconds(unit) : 0.0;
  TimeInfo info;
  info.timestamp = ago ? base - offset : base + offset;
  info.date_time_iso_format_string = sim::iso8601_micro(info.timestamp, zone);
  info.timezone = zone;
  return info;
}

std::string render(const TimeInfo& info) {
  return "timestamp = " + text::shortest(info.timestamp) + " date_time_iso_format_string = '" +
         info.date_time_iso_format_string + "' timezone = '" + info.timezone + "'";
}

}  // namespace aiops::tools
