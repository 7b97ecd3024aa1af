#include "aiops/sim/clock.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <stdexcept>

#include "aiops/util/text.hpp"

namespace aiops::sim {

ClockSpec ClockSpec::sequence(std::vector<double> ts) {
  if (ts.empty()) throw std::invalid_argument("sequence clock needs at least one timestamp");
  return {Mode::Sequence, std::move(ts)};
}

ClockSpec ClockSpec::parse(std::string_view text) {
  if (text == "system") return system();
  auto parse_list = [](std::string_view list) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= list.size()) {
      auto comma = list.find(',', start);
      auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      auto v = text::parse_double(item);
      if (!v) throw std::invalid_argument("invalid clock timestamp '" + std::string(item) + "'");
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  };
  if (text::starts_with(text, "fixed:")) {
    auto ts = parse_list(text.substr(6));
    if (ts.size() != 1) throw std::invalid_argument("fixed clock takes exactly one timestamp");
    return fixed(ts.front());
  }
  if (text::starts_with(text, "sequence:")) return sequence(parse_list(text.substr(9)));
  throw std::invalid_argument("invalid clock '" + std::string(text) + "' (system | fixed:<ts> | sequence:<ts>,...)");
}

std::string ClockSpec::describe() const {
  switch (mode) {
    case Mode::System: return "system";
    case Mode::Fixed: return "fixed:" + text::shortest(timestamps.front());
    case Mode::Sequence: {
      std::vector<std::string> parts;
      for (double t : timestamps) parts.push_back(text::shortest(t));
      return "sequence:" + text::join(parts, ",");
    }
  }
  return "system";
}

double Clock::now() {
  double value = 0.0;
  switch (spec_.mode) {
    case ClockSpec::Mode::System: {
      const auto since = std::chrono::system_clock::now().time_since_epoch();
      value = static_cast<double>(std::chrono::duration_cast<std::chrono::microseconds>(since).count()) / 1e6;
      break;
    }
    case ClockSpec::Mode::Fixed: value = spec_.timestamps.front(); break;
    case ClockSpec::Mode::Sequence: {
      const auto i = cursor_.fetch_add(1);
      value = spec_.timestamps[std::min(i, spec_.timestamps.size() - 1)];
      break;
    }
  }
  bool expected = false;
  if (has_first_.compare_exchange_strong(expected, true)) first_.store(value);
  return value;
}

double Clock::first_reading() {
  if (!has_first_.load()) return now();
  return first_.load();
}

namespace {

// localtime_r consults the TZ environment variable; access is serialized so
// concurrent conversions to different zones do not interfere.
std::mutex& tz_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

bool is_known_zone(const std::string& zone) {
  if (zone == "UTC") return true;
  if (zone.empty() || zone.find("..") != std::string::npos || zone.front() == '/') return false;
  std::error_code ec;
  return std::filesystem::is_regular_file("/usr/share/zoneinfo/" + zone, ec);
}

LocalTime to_local(std::int64_t epoch_seconds, const std::string& zone) {
  if (!is_known_zone(zone)) throw std::invalid_argument("unknown time zone '" + zone + "'");
  std::tm tm{};
  const std::time_t t = static_cast<std::time_t>(epoch_seconds);
  {
    std::lock_guard lock(tz_mutex());
    const char* previous = std::getenv("TZ");
    const std::string saved = previous ? previous : "";
    ::setenv("TZ", zone.c_str(), 1);
    ::tzset();
    ::localtime_r(&t, &tm);
    if (previous) {
      ::setenv("TZ", saved.c_str(), 1);
    } else {
      ::unsetenv("TZ");
    }
    ::tzset();
  }
  LocalTime lt;
  lt.year = tm.tm_year + 1900;
  lt.month = tm.tm_mon + 1;
  lt.day = tm.tm_mday;
  lt.hour = tm.tm_hour;
  lt.minute = tm.tm_min;
  lt.second = tm.tm_sec;
  lt.weekday = tm.tm_wday;
  lt.utc_offset_s = tm.tm_gmtoff;
  return lt;
}

namespace {

struct SplitTime {
  std::int64_t seconds;
  std::int64_t micros;
};

SplitTime split(double epoch_seconds) {
  const auto total = std::llround(epoch_seconds * 1e6);
  auto secs = total / 1'000'000;
  auto micros = total % 1'000'000;
  if (micros < 0) {
    micros += 1'000'000;
    secs -= 1;
  }
  return {secs, micros};
}

std::string date_part(const LocalTime& lt) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", lt.year, lt.month, lt.day);
  return buf;
}

std::string time_part(const LocalTime& lt) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", lt.hour, lt.minute, lt.second);
  return buf;
}

}  // namespace

std::string iso8601_micro(double epoch_seconds, const std::string& zone) {
  const auto [secs, micros] = split(epoch_seconds);
  const auto lt = to_local(secs, zone);
  const long off = lt.utc_offset_s;
  const long abs_off = off < 0 ? -off : off;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%sT%s.%06lld%c%02ld:%02ld", date_part(lt).c_str(), time_part(lt).c_str(),
                static_cast<long long>(micros), off < 0 ? '-' : '+', abs_off / 3600, (abs_off % 3600) / 60);
  return buf;
}

std::string iso8601_seconds(double epoch_seconds, const std::string& zone) {
  const auto lt = to_local(split(epoch_seconds).seconds, zone);
  return date_part(lt) + "T" + time_part(lt);
}

std::string date_string(double epoch_seconds, const std::string& zone) {
  return date_part(to_local(split(epoch_seconds).seconds, zone));
}

std::string weekday_name(int weekday) {
  static const char* kNames[] = {"Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"};
  return kNames[((weekday % 7) + 7) % 7];
}

}  // namespace aiops::sim
