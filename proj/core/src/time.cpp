#include "specmon/time.hpp"

#include <absl/time/civil_time.h>
#include <absl/time/time.h>

#include <charconv>
#include <cstdio>

#include "specmon/error.hpp"

namespace specmon {

namespace {

absl::Time to_absl(Timestamp t) { return absl::FromUnixMicros(to_unix_us(t)); }
Timestamp from_absl(absl::Time t) { return from_unix_us(absl::ToUnixMicros(t)); }

absl::CivilDay to_civil(CivilDate d) { return absl::CivilDay(d.year, d.month, d.day); }
CivilDate from_civil(absl::CivilDay d) {
  return CivilDate{static_cast<int>(d.year()), d.month(), d.day()};
}

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError("malformed date/time: '" + std::string(whole) + "'");
  }
  return v;
}

CivilDate checked_date(int y, int m, int d, std::string_view whole) {
  absl::CivilDay day(y, m, d);
  if (day.year() != y || day.month() != m || day.day() != d) {
    throw ParseError("invalid calendar date: '" + std::string(whole) + "'");
  }
  return CivilDate{y, m, d};
}

}  // namespace

Timestamp floor_to(Timestamp t, Micros unit) {
  auto us = t.time_since_epoch().count();
  auto u = unit.count();
  auto q = us / u;
  if (us % u < 0) --q;
  return Timestamp{Micros{q * u}};
}

CivilDate utc_date(Timestamp t) {
  return from_civil(absl::ToCivilDay(to_absl(t), absl::UTCTimeZone()));
}

Timestamp utc_midnight(CivilDate d) {
  return from_absl(absl::FromCivil(to_civil(d), absl::UTCTimeZone()));
}

CivilDate next_day(CivilDate d) { return from_civil(to_civil(d) + 1); }

std::string format_day_key(CivilDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d", d.year, d.month, d.day);
  return buf;
}

std::string format_iso_date(CivilDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

CivilDate parse_date(std::string_view text) {
  if (text.size() == 8) {
    return checked_date(parse_int(text.substr(0, 4), text), parse_int(text.substr(4, 2), text),
                        parse_int(text.substr(6, 2), text), text);
  }
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    return checked_date(parse_int(text.substr(0, 4), text), parse_int(text.substr(5, 2), text),
                        parse_int(text.substr(8, 2), text), text);
  }
  throw ParseError("malformed date: '" + std::string(text) + "'");
}

std::string format_minute_key(Timestamp t) {
  auto c = absl::ToCivilMinute(to_absl(t), absl::UTCTimeZone());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d%02d", c.hour(), c.minute());
  return buf;
}

std::string format_hour_key(Timestamp t) {
  auto c = absl::ToCivilHour(to_absl(t), absl::UTCTimeZone());
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", c.hour());
  return buf;
}

std::string format_rfc3339(Timestamp t) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%E6SZ", to_absl(t), absl::UTCTimeZone());
}

Timestamp parse_rfc3339(std::string_view text) {
  absl::Time out;
  std::string err;
  if (!absl::ParseTime(absl::RFC3339_full, std::string(text), &out, &err)) {
    throw ParseError("malformed timestamp '" + std::string(text) + "': " + err);
  }
  return from_absl(out);
}

struct TimeZone::Impl {
  absl::TimeZone zone;
};

TimeZone::TimeZone(std::string name, std::shared_ptr<const Impl> impl)
    : name_(std::move(name)), impl_(std::move(impl)) {}

TimeZone TimeZone::load(const std::string& name) {
  absl::TimeZone tz;
  if (name.empty() || !absl::LoadTimeZone(name, &tz)) {
    throw InvalidArgument("unresolvable time zone: '" + name + "'");
  }
  return TimeZone(name, std::make_shared<const Impl>(Impl{tz}));
}

TimeZone TimeZone::utc() { return TimeZone("UTC", std::make_shared<const Impl>(Impl{absl::UTCTimeZone()})); }

int TimeZone::local_hour(Timestamp t) const {
  return absl::ToCivilHour(to_absl(t), impl_->zone).hour();
}

int TimeZone::local_weekday(Timestamp t) const {
  auto wd = absl::GetWeekday(absl::ToCivilDay(to_absl(t), impl_->zone));
  // absl::Weekday enumerates monday == 0.
  return static_cast<int>(wd);
}

CivilDate TimeZone::local_date(Timestamp t) const {
  return from_civil(absl::ToCivilDay(to_absl(t), impl_->zone));
}

Timestamp TimeZone::local_midnight(CivilDate d) const {
  return from_absl(absl::FromCivil(to_civil(d), impl_->zone));
}

Timestamp TimeZone::local_time(CivilDate d, int hour) const {
  return from_absl(absl::FromCivil(absl::CivilHour(d.year, d.month, d.day, hour), impl_->zone));
}

bool is_resolvable_timezone(const std::string& name) {
  absl::TimeZone tz;
  return !name.empty() && absl::LoadTimeZone(name, &tz);
}

}  // namespace specmon
