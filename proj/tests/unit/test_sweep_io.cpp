#include <doctest.h>

#include <fstream>

#include "oracles.hpp"
#include "specmon/demo.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/sim.hpp"
#include "specmon/sweep_io.hpp"

using namespace specmon;
using namespace specmon::testing;
namespace fs = std::filesystem;

namespace {
const Timestamp kMonday = from_unix_us(1'704'067'200'000'000);
}

TEST_CASE("paths follow the UTC day/minute layout") {
  const auto t = kMonday + std::chrono::hours{13} + std::chrono::minutes{4} + std::chrono::seconds{30};
  CHECK(minute_data_path("/d", t) == fs::path("/d/20240101/1304.sweeps"));
  CHECK(manifest_path("/d", t) == fs::path("/d/20240101/1304.manifest"));
  CHECK(params_path("/d", t) == fs::path("/d/20240101/13.params.json"));
  CHECK(day_dir("/d", CivilDate{2024, 1, 1}) == fs::path("/d/20240101"));
}

TEST_CASE("minute file round trip is exact") {
  TempDir tmp("io");
  const auto env = demo_environment(0);
  std::vector<Sweep> written;
  const auto path = tmp / "1000.sweeps";
  {
    MinuteFileWriter w(path);
    for (int k = 0; k < 6; ++k) {
      written.push_back(generate_sweep(env, kMonday + std::chrono::seconds{10 * k}));
      w.append(written.back());
    }
  }
  const auto back = read_minute_file(path, env.site_id);
  CHECK(back == written);
  CHECK(read_file(path).rfind(std::string(kSweepFileHeader), 0) == 0);
}

TEST_CASE("malformed minute data names the file and line") {
  const auto header = std::string(kSweepFileHeader) + "\n";
  auto try_parse = [&](const std::string& body) -> std::string {
    try {
      parse_minute_data(header + body, "bad.sweeps", "x");
    } catch (const FileParseError& e) {
      CHECK(e.file() == "bad.sweeps");
      return e.what();
    }
    return "";
  };
  CHECK_FALSE(try_parse("1,2\n").empty());
  CHECK_FALSE(try_parse("1,2,abc\n").empty());
  CHECK_FALSE(try_parse("x,2,-90\n").empty());
  CHECK_FALSE(try_parse("1,2,nan\n").empty());
  // rows of one sweep must be ascending in frequency
  CHECK_FALSE(try_parse("1,20,-90\n1,10,-90\n").empty());
  CHECK_THROWS_AS(parse_minute_data("wrong header\n", "bad.sweeps", "x"), FileParseError);
  // empty body is a valid empty file
  CHECK(parse_minute_data(header, "ok.sweeps", "x").empty());
}

TEST_CASE("manifest and params round trip") {
  TempDir tmp("io");
  const MinuteManifest m{kMonday, 6, 4};
  write_manifest(tmp / "0000.manifest", m);
  CHECK(read_manifest(tmp / "0000.manifest", kMonday) == m);
  std::ofstream(tmp / "bad.manifest") << "6 7\n";
  CHECK_THROWS_AS(read_manifest(tmp / "bad.manifest", kMonday), FileParseError);
  std::ofstream(tmp / "junk.manifest") << "six\n";
  CHECK_THROWS_AS(read_manifest(tmp / "junk.manifest", kMonday), FileParseError);

  SiteParams p;
  p.site_id = "alpha";
  p.freq_start_hz = 0;
  p.freq_stop_hz = 20'000'000;
  p.rbw_hz = 1e6;
  p.sweep_time_s = 10;
  p.latitude = 39.5;
  p.longitude = -105.25;
  p.antenna_type = "discone";
  p.lna_type = "lna";
  p.timezone = "America/Denver";
  p.gate_threshold_dbm = -88.5;
  write_params(tmp / "00.params.json", p);
  CHECK(read_params(tmp / "00.params.json") == p);
  CHECK_THROWS_AS(params_from_json(R"({"site_id": "a"})", "p.json"), ParseError);
}

TEST_CASE("day listing ignores unrelated files") {
  TempDir tmp("io");
  const auto dir = tmp / "20240101";
  fs::create_directories(dir);
  std::ofstream(dir / "0001.sweeps") << kSweepFileHeader << "\n";
  std::ofstream(dir / "0001.manifest") << "1 0\n";
  std::ofstream(dir / "00.params.json") << "{}";
  std::ofstream(dir / "notes.txt") << "hi";
  std::ofstream(dir / "9999.sweeps") << "";
  fs::create_directories(tmp / "not-a-day");
  fs::create_directories(tmp / "20240102");
  const auto l = scan_day_dir(dir);
  CHECK(l.day == CivilDate{2024, 1, 1});
  CHECK(l.data_files.size() == 1);
  CHECK(l.data_files.begin()->first == kMonday + kMinute);
  CHECK(l.manifests.size() == 1);
  CHECK(l.params.size() == 1);
  CHECK(list_day_dirs(tmp.path()) == std::vector<CivilDate>{{2024, 1, 1}, {2024, 1, 2}});
}

TEST_CASE("replay yields recorded sweeps in order") {
  TempDir tmp("io");
  const auto env = demo_environment(0);
  std::vector<Sweep> written;
  for (int m : {0, 1, 60 * 24}) {  // crosses a day boundary
    const auto minute = kMonday + m * kMinute;
    MinuteFileWriter w(minute_data_path(tmp.path(), minute));
    for (int k = 0; k < 3; ++k) {
      written.push_back(generate_sweep(env, minute + std::chrono::seconds{20 * k}));
      w.append(written.back());
    }
  }
  CHECK(replay_source(tmp.path(), env.site_id) == written);
  CHECK(replay_source(day_dir(tmp.path(), {2024, 1, 2}), env.site_id).size() == 3);

  ReplaySource src(tmp.path(), env.site_id);
  std::vector<Sweep> streamed;
  while (auto s = src.next(kMonday)) streamed.push_back(*s);
  CHECK(streamed == written);

  std::ofstream(minute_data_path(tmp.path(), kMonday + 5 * kMinute)) << "garbage\n";
  CHECK_THROWS_AS(replay_source(tmp.path()), FileParseError);
}
