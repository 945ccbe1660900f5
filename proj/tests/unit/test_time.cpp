#include <doctest.h>

#include "specmon/error.hpp"
#include "specmon/time.hpp"

using namespace specmon;

namespace {
const Timestamp kJan1 = from_unix_us(1'704'067'200'000'000);  // 2024-01-01T00:00Z, Monday
}

TEST_CASE("floors") {
  const auto t = kJan1 + std::chrono::hours{5} + std::chrono::minutes{7} + std::chrono::seconds{9};
  CHECK(floor_minute(t) == kJan1 + std::chrono::hours{5} + std::chrono::minutes{7});
  CHECK(floor_hour(t) == kJan1 + std::chrono::hours{5});
  CHECK(floor_day(t) == kJan1);
  // before the epoch floors go down, not toward zero
  CHECK(floor_minute(from_unix_us(-1)) == from_unix_us(-60'000'000));
}

TEST_CASE("civil dates") {
  CHECK(utc_date(kJan1) == CivilDate{2024, 1, 1});
  CHECK(utc_date(kJan1 - Micros{1}) == CivilDate{2023, 12, 31});
  CHECK(utc_midnight(CivilDate{2024, 1, 1}) == kJan1);
  CHECK(next_day(CivilDate{2024, 2, 28}) == CivilDate{2024, 2, 29});
  CHECK(next_day(CivilDate{2023, 2, 28}) == CivilDate{2023, 3, 1});
  CHECK(next_day(CivilDate{2024, 12, 31}) == CivilDate{2025, 1, 1});
  CHECK(format_day_key(CivilDate{2024, 3, 9}) == "20240309");
  CHECK(format_iso_date(CivilDate{2024, 3, 9}) == "2024-03-09");
  CHECK(parse_date("20240309") == CivilDate{2024, 3, 9});
  CHECK(parse_date("2024-03-09") == CivilDate{2024, 3, 9});
  CHECK_THROWS_AS(parse_date("2024-13-01"), ParseError);
  CHECK_THROWS_AS(parse_date("2024-02-30"), ParseError);
  CHECK_THROWS_AS(parse_date("yesterday"), ParseError);
}

TEST_CASE("keys and RFC 3339") {
  const auto t = kJan1 + std::chrono::hours{13} + std::chrono::minutes{4} + Micros{250};
  CHECK(format_minute_key(t) == "1304");
  CHECK(format_hour_key(t) == "13");
  CHECK(format_rfc3339(t) == "2024-01-01T13:04:00.000250Z");
  CHECK(parse_rfc3339("2024-01-01T13:04:00.000250Z") == t);
  CHECK(parse_rfc3339("2024-01-01T13:04:00Z") == t - Micros{250});
  CHECK(parse_rfc3339("2024-01-01T06:04:00-07:00") == t - Micros{250});
  CHECK_THROWS_AS(parse_rfc3339("2024-01-01 13:04"), ParseError);
}

TEST_CASE("time zones") {
  const auto utc = TimeZone::utc();
  CHECK(utc.local_hour(kJan1) == 0);
  CHECK(utc.local_weekday(kJan1) == 0);

  const auto den = TimeZone::load("America/Denver");
  CHECK(den.local_hour(kJan1) == 17);
  CHECK(den.local_date(kJan1) == CivilDate{2023, 12, 31});
  CHECK(den.local_weekday(kJan1) == 6);
  CHECK(den.local_midnight(CivilDate{2024, 1, 1}) == kJan1 + std::chrono::hours{7});
  CHECK(den.local_time(CivilDate{2024, 1, 1}, 9) == kJan1 + std::chrono::hours{16});

  // DST: 2024-03-10 in Denver has 23 hours
  const auto d1 = den.local_midnight(CivilDate{2024, 3, 10});
  const auto d2 = den.local_midnight(CivilDate{2024, 3, 11});
  CHECK(d2 - d1 == std::chrono::hours{23});

  const auto kol = TimeZone::load("Asia/Kolkata");
  CHECK(kol.local_hour(kJan1) == 5);

  CHECK(is_resolvable_timezone("Europe/Oslo"));
  CHECK_FALSE(is_resolvable_timezone("Mars/Olympus"));
  CHECK_THROWS_AS(TimeZone::load("Mars/Olympus"), InvalidArgument);
}
