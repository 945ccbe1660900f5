#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace specmon {

using Micros = std::chrono::microseconds;
using Timestamp = std::chrono::time_point<std::chrono::system_clock, Micros>;

constexpr Micros kMinute = std::chrono::minutes{1};
constexpr Micros kHour = std::chrono::hours{1};
constexpr Micros kDay = std::chrono::hours{24};

inline Timestamp from_unix_us(std::int64_t us) { return Timestamp{Micros{us}}; }
inline std::int64_t to_unix_us(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_unix_seconds(double s) {
  return Timestamp{Micros{static_cast<std::int64_t>(s * 1e6)}};
}
inline double to_unix_seconds(Timestamp t) { return static_cast<double>(to_unix_us(t)) * 1e-6; }

Timestamp floor_to(Timestamp t, Micros unit);
inline Timestamp floor_minute(Timestamp t) { return floor_to(t, kMinute); }
inline Timestamp floor_hour(Timestamp t) { return floor_to(t, kHour); }
inline Timestamp floor_day(Timestamp t) { return floor_to(t, kDay); }

/// Calendar date without a zone attached.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

CivilDate utc_date(Timestamp t);
Timestamp utc_midnight(CivilDate d);
CivilDate next_day(CivilDate d);

/// "YYYYMMDD"
std::string format_day_key(CivilDate d);
/// "YYYY-MM-DD"
std::string format_iso_date(CivilDate d);
/// Accepts "YYYYMMDD" or "YYYY-MM-DD"; throws ParseError otherwise.
CivilDate parse_date(std::string_view text);
/// "HHMM" of the UTC minute containing t.
std::string format_minute_key(Timestamp t);
/// "HH" of the UTC hour containing t.
std::string format_hour_key(Timestamp t);
/// RFC 3339 UTC with microseconds, e.g. 2025-06-01T12:00:00.000000Z
std::string format_rfc3339(Timestamp t);
Timestamp parse_rfc3339(std::string_view text);

/// IANA time zone handle. Copyable; lookups are thread-safe.
class TimeZone {
 public:
  /// Throws InvalidArgument if the zone cannot be resolved.
  static TimeZone load(const std::string& name);
  static TimeZone utc();

  const std::string& name() const { return name_; }

  /// Local wall-clock hour 0..23.
  int local_hour(Timestamp t) const;
  /// Local weekday, 0 = Monday .. 6 = Sunday.
  int local_weekday(Timestamp t) const;
  CivilDate local_date(Timestamp t) const;
  /// First instant of the local calendar day.
  Timestamp local_midnight(CivilDate d) const;
  /// Instant of local (d, hour:00).
  Timestamp local_time(CivilDate d, int hour) const;

 private:
  struct Impl;
  TimeZone(std::string name, std::shared_ptr<const Impl> impl);
  std::string name_;
  std::shared_ptr<const Impl> impl_;
};

bool is_resolvable_timezone(const std::string& name);

}  // namespace specmon
