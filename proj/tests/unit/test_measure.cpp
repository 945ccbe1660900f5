#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specmon/error.hpp"
#include "specmon/measure.hpp"

using namespace specmon;
using namespace specmon::testing;

namespace {

const Timestamp kHour0 = from_unix_us(1'704'067'200'000'000);

Sweep flat(double power, Hz start = 0, Hz stop = 20'000'000, Hz rbw = 1'000'000) {
  Sweep s;
  for (Hz f = start + rbw / 2; f < stop; f += rbw) s.bins.push_back({f, power});
  return s;
}

AuContext ctx20() {
  AuContext c;
  c.site_id = "x";
  c.hour_start = kHour0;
  c.grid = build_channel_grid(0, 20'000'000);
  c.sweep_time_s = 60.0;
  c.gate_threshold_dbm = -95.0;
  c.analysis_threshold_dbm = -85.0;
  return c;
}

}  // namespace

TEST_CASE("threshold scaling") {
  CHECK(scale_threshold({-72.0, 20e6}, 20e6) == doctest::Approx(-72.0).epsilon(1e-12));
  CHECK(std::fabs(scale_threshold({-72.0, 20e6}, 5e6) - (-72.0 + 10 * std::log10(0.25))) < 1e-12);
  CHECK(std::fabs(scale_threshold({-72.0, 20e6}, 1e6) - oracle_scaled_threshold(-72.0, 20e6, 1e6)) < 1e-9);
  CHECK(scale_threshold({-80.0, 20e6}, 40e6) == doctest::Approx(-80.0 + 10 * std::log10(2.0)));
}

TEST_CASE("channel grid truncates the last channel") {
  const auto g = build_channel_grid(100'000'000, 112'000'000);
  REQUIRE(g.size() == 3);
  CHECK(g.channels[2].start_hz == 110'000'000);
  CHECK(g.channels[2].stop_hz == 112'000'000);
  CHECK_THROWS(build_channel_grid(10, 10));
  CHECK_THROWS(build_channel_grid(0, 10, 0));
}

TEST_CASE("occupancy is strict and channel-local") {
  const auto g = build_channel_grid(0, 20'000'000);
  auto s = flat(-100.0);
  s.bins[7].power_dbm = -85.0;  // exactly at threshold: not occupied
  CHECK(sweep_occupancy(s, g, -85.0) == Occupancy{false, false, false, false});
  s.bins[7].power_dbm = std::nextafter(-85.0, 0.0);
  CHECK(sweep_occupancy(s, g, -85.0) == Occupancy{false, true, false, false});
  CHECK(any_bin_above(s, -85.0));
  CHECK_FALSE(any_bin_above(flat(-100.0), -85.0));

  // bins outside the grid never count
  Sweep outside;
  outside.bins = {{25'000'000, 0.0}};
  CHECK(sweep_occupancy(outside, g, -85.0) == Occupancy(4, false));
}

TEST_CASE("accumulator rejects a gate above the analysis threshold") {
  auto c = ctx20();
  c.gate_threshold_dbm = -80.0;
  CHECK_THROWS_AS(AuAccumulator{c}, GateViolation);
}

TEST_CASE("accumulator: AU over the manifest denominator") {
  AuAccumulator acc(ctx20());
  for (int m = 0; m < 60; ++m) {
    const auto minute = kHour0 + m * kMinute;
    const bool stored = m % 4 == 0;
    acc.add_manifest({minute, 1, stored ? 1 : 0});
    if (stored) acc.add_occupancy(minute, Occupancy{true, m % 8 == 0, false, false});
  }
  const auto rows = acc.finish();
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].total_sweeps == 60);
  CHECK(rows[0].occupied_sweeps == 15);
  CHECK(*rows[0].au_percent == doctest::Approx(25.0));
  CHECK(rows[1].occupied_sweeps == 8);
  CHECK(*rows[2].au_percent == 0.0);
  CHECK(rows[0].complete);
  CHECK(rows[0].hour_start == kHour0);
}

TEST_CASE("accumulator: coverage and empty hours") {
  {
    AuAccumulator acc(ctx20());
    for (int m = 0; m < 53; ++m) acc.add_manifest({kHour0 + m * kMinute, 1, 0});
    const auto rows = acc.finish();
    CHECK_FALSE(rows[0].complete);  // 53 < 0.9 * 60
    CHECK(*rows[0].au_percent == 0.0);
  }
  {
    AuAccumulator acc(ctx20());
    for (int m = 0; m < 54; ++m) acc.add_manifest({kHour0 + m * kMinute, 1, 0});
    CHECK(acc.finish()[0].complete);
  }
  {
    AuAccumulator acc(ctx20());
    const auto rows = acc.finish();
    REQUIRE(rows.size() == 4);
    CHECK_FALSE(rows[0].au_percent.has_value());
    CHECK_FALSE(rows[0].complete);
    CHECK(rows[0].total_sweeps == 0);
  }
}

TEST_CASE("accumulator: inconsistent inputs") {
  AuAccumulator acc(ctx20());
  acc.add_manifest({kHour0, 2, 1});
  acc.add_occupancy(kHour0, Occupancy(4, true));
  acc.add_occupancy(kHour0 + std::chrono::seconds{30}, Occupancy(4, true));
  CHECK_THROWS_AS(acc.finish(), InvalidArgument);

  AuAccumulator other(ctx20());
  CHECK_THROWS_AS(other.add_occupancy(kHour0 + kHour, Occupancy(4, false)), InvalidArgument);
  CHECK_THROWS_AS(other.add_manifest({kHour0 - kMinute, 1, 0}), InvalidArgument);
  CHECK_THROWS_AS(other.add_occupancy(kHour0, Occupancy(3, false)), InvalidArgument);
  CHECK_THROWS_AS(other.add_manifest({kHour0, 1, 2}), InvalidArgument);
}

TEST_CASE("compute_au agrees with the brute-force oracle") {
  std::mt19937_64 rng(11);
  for (int inst = 0; inst < 30; ++inst) {
    const Hz rbw = 500'000;
    const Hz stop = 5'000'000 * (1 + static_cast<Hz>(rng() % 4)) + 2'000'000;
    auto c = ctx20();
    c.grid = build_channel_grid(0, stop);
    c.sweep_time_s = 15.0;
    c.analysis_threshold_dbm = scale_threshold({-72.0, 20e6}, static_cast<double>(rbw));
    c.gate_threshold_dbm = c.analysis_threshold_dbm - 3.0;

    std::vector<TimedOccupancy> stream;
    std::vector<MinuteManifest> manifests;
    std::vector<OracleSweep> osweeps;
    std::vector<OracleMinute> ominutes;
    std::uniform_real_distribution<double> pw(-100.0, -75.0);
    for (int m = 0; m < 60; ++m) {
      if (rng() % 10 == 0) continue;  // dead minute
      MinuteManifest man{kHour0 + m * kMinute, 4, 0};
      for (int k = 0; k < 4; ++k) {
        Sweep s = flat(-110.0, 0, stop, rbw);
        for (auto& b : s.bins) {
          if (rng() % 5 == 0) b.power_dbm = pw(rng);
        }
        s.start_time = man.minute_start + std::chrono::seconds{15 * k};
        if (!any_bin_above(s, c.gate_threshold_dbm)) continue;
        ++man.stored_sweeps;
        stream.push_back({s.start_time, sweep_occupancy(s, c.grid, c.analysis_threshold_dbm)});
        OracleSweep os;
        for (const auto& b : s.bins) os.bins.emplace_back(b.freq_hz, b.power_dbm);
        osweeps.push_back(os);
      }
      manifests.push_back(man);
      ominutes.push_back({to_unix_us(man.minute_start), man.total_sweeps, man.stored_sweeps});
    }
    std::vector<OracleChannel> och;
    for (const auto& ch : c.grid.channels) och.push_back({ch.start_hz, ch.stop_hz});
    const auto got = compute_au(stream, manifests, c);
    const auto want = brute_force_au(och, osweeps, ominutes, c.analysis_threshold_dbm, c.sweep_time_s, 0.9);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].occupied_sweeps == want[i].occupied);
      CHECK(got[i].total_sweeps == want[i].total);
      CHECK(got[i].au_percent.has_value() == want[i].has_au);
      if (want[i].has_au) CHECK(*got[i].au_percent == want[i].au);
      CHECK(got[i].complete == want[i].complete);
    }
  }
}

TEST_CASE("expected sweeps per hour") {
  CHECK(expected_sweeps_per_hour(1.0) == doctest::Approx(3600.0));
  CHECK(expected_sweeps_per_hour(7.0) == doctest::Approx(3600.0 / 7.0));
}
