#include <doctest.h>

#include <spdlog/spdlog.h>

#include <fstream>

#include "oracles.hpp"
#include "specmon/agent.hpp"
#include "specmon/archive.hpp"
#include "specmon/demo.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/sweep_io.hpp"

using namespace specmon;
using namespace specmon::testing;
namespace fs = std::filesystem;

namespace {

const Timestamp kMonday = from_unix_us(1'704'067'200'000'000);

struct Rig {
  TempDir tmp{"agent"};
  Environment env = [] {
    auto e = demo_environment(0);
    e.sweep_time_s = 60.0;
    return e;
  }();
  AgentConfig config;
  ManualClock clock{kMonday};
  Scheduler sched{clock};
  std::atomic<bool> blocked{false};
  std::unique_ptr<LocalDirClient> inbox;
  std::unique_ptr<GatedClient> gated;
  SimulatedSource source{env};

  Rig() {
    spdlog::set_level(spdlog::level::off);
    config.params.site_id = env.site_id;
    config.params.freq_start_hz = env.freq_start_hz;
    config.params.freq_stop_hz = env.freq_stop_hz;
    config.params.rbw_hz = env.rbw_hz;
    config.params.sweep_time_s = env.sweep_time_s;
    config.params.gate_threshold_dbm = -88.0;
    config.data_dir = tmp / "data";
    config.outbox_dir = tmp / "outbox";
    config.compression_level = 1;
    fs::create_directories(tmp / "inbox");
    inbox = std::make_unique<LocalDirClient>(tmp / "inbox", clock);
    gated = std::make_unique<GatedClient>(*inbox, blocked);
  }
  fs::path central(CivilDate d) const { return tmp / "inbox" / config.site_id() / archive_name(config.site_id(), d); }
  bool local(CivilDate d) const { return fs::exists(day_dir(config.data_dir, d)); }
};

}  // namespace

TEST_CASE("recorder gates sweeps but counts them all") {
  Rig r;
  r.config.params.gate_threshold_dbm = -50.0;  // above every band: nothing stored
  Recorder rec(r.config);
  for (int k = 0; k < 3; ++k) rec.record(generate_sweep(r.env, kMonday + std::chrono::seconds{20 * k}));
  r.config.params.gate_threshold_dbm = -88.0;
  rec.record(generate_sweep(r.env, kMonday + kMinute));
  rec.flush();
  CHECK(read_manifest(manifest_path(r.config.data_dir, kMonday), kMonday) == MinuteManifest{kMonday, 3, 0});
  CHECK(read_manifest(manifest_path(r.config.data_dir, kMonday + kMinute), kMonday + kMinute) ==
        MinuteManifest{kMonday + kMinute, 1, 1});
  CHECK(read_minute_file(minute_data_path(r.config.data_dir, kMonday)).empty());
  CHECK(read_minute_file(minute_data_path(r.config.data_dir, kMonday + kMinute)).size() == 1);
  CHECK(fs::exists(params_path(r.config.data_dir, kMonday)));
  CHECK(read_params(params_path(r.config.data_dir, kMonday)).site_id == r.config.site_id());
}

TEST_CASE("recorder applies calibration before the gate") {
  Rig r;
  r.config.params.gate_threshold_dbm = -50.0;
  CalibrationTable cal;
  cal.points = {{0, 10.0}};
  r.config.calibration = cal;
  Recorder rec(r.config);
  const auto raw = generate_sweep(r.env, kMonday);
  rec.record(raw);  // saturated band at -55 becomes -45 > gate
  rec.flush();
  const auto stored = read_minute_file(minute_data_path(r.config.data_dir, kMonday));
  REQUIRE(stored.size() == 1);
  CHECK(stored[0].bins[0].power_dbm == doctest::Approx(raw.bins[0].power_dbm + 10.0).epsilon(1e-6));
}

TEST_CASE("a healthy day is archived, uploaded, confirmed and deleted") {
  Rig r;
  SiteAgent agent(r.config, r.source, *r.gated, r.clock);
  agent.attach(r.sched);
  r.sched.run_until(kMonday + kDay + std::chrono::hours{2});
  const CivilDate d0{2024, 1, 1};
  CHECK(fs::exists(r.central(d0)));
  CHECK_FALSE(r.local(d0));
  CHECK(r.local(CivilDate{2024, 1, 2}));
  CHECK(fs::is_empty(r.config.outbox_dir / "") == false);  // heartbeat staging files only
  for (const auto& e : fs::directory_iterator(r.config.outbox_dir)) {
    CHECK(e.path().filename().string().rfind(".hb-", 0) == 0);
  }
  const auto c = agent.counters();
  CHECK(c.archives_uploaded == 1);
  CHECK(c.sweeps_seen == 26 * 60);
  CHECK(c.reach_uploads == c.reach_attempts);
  CHECK(fs::exists(r.tmp / "inbox" / "hb" / r.config.site_id() / "reach"));
  CHECK(fs::exists(r.tmp / "inbox" / "hb" / r.config.site_id() / "collect"));

  // the archive holds exactly what was recorded
  decompress(r.central(d0), r.tmp / "restored" / "20240101");
  const auto l = scan_day_dir(r.tmp / "restored" / "20240101");
  CHECK(l.manifests.size() == 1440);
  CHECK(l.params.size() == 24);
}

TEST_CASE("a failed upload keeps raw data and is retried hourly") {
  Rig r;
  SiteAgent agent(r.config, r.source, *r.gated, r.clock);
  agent.attach(r.sched);
  r.sched.at(kMonday + std::chrono::hours{20}, [&](Timestamp) { r.blocked = true; });
  r.sched.at(kMonday + kDay + std::chrono::hours{5}, [&](Timestamp) { r.blocked = false; });
  const CivilDate d0{2024, 1, 1};
  r.sched.run_until(kMonday + kDay + std::chrono::hours{4});
  CHECK(r.local(d0));
  CHECK_FALSE(fs::exists(r.central(d0)));
  r.sched.run_until(kMonday + kDay + std::chrono::hours{7});
  CHECK_FALSE(r.local(d0));
  CHECK(fs::exists(r.central(d0)));
}

TEST_CASE("suppressed uploads keep data local") {
  Rig r;
  SiteAgent agent(r.config, r.source, *r.gated, r.clock);
  agent.faults().suppress_archive_upload = true;
  agent.attach(r.sched);
  r.sched.run_until(kMonday + 2 * kDay + std::chrono::hours{3});
  CHECK(r.local(CivilDate{2024, 1, 1}));
  CHECK(r.local(CivilDate{2024, 1, 2}));
  CHECK_FALSE(fs::exists(r.tmp / "inbox" / r.config.site_id()));
  const auto report = agent.daily_archive_job(r.clock.now());
  CHECK(report.failed.size() == 2);
  agent.faults().suppress_archive_upload = false;
  const auto ok = agent.daily_archive_job(r.clock.now());
  CHECK(ok.uploaded.size() == 2);
  CHECK(ok.ok());
}

TEST_CASE("a crash at any stage never loses the day") {
  for (auto stage : {ArchiveStage::compressed, ArchiveStage::uploaded, ArchiveStage::confirmed,
                     ArchiveStage::raw_deleted}) {
    CAPTURE(static_cast<int>(stage));
    Rig r;
    const CivilDate d0{2024, 1, 1};
    {
      SiteAgent agent(r.config, r.source, *r.gated, r.clock);
      bool armed = true;
      agent.faults().archive_hook = [&](ArchiveStage s, CivilDate) {
        if (armed && s == stage) {
          armed = false;
          throw SimulatedCrash("crash");
        }
      };
      agent.attach(r.sched);
      CHECK_THROWS_AS(r.sched.run_until(kMonday + kDay + std::chrono::hours{3}), SimulatedCrash);
      CHECK((r.local(d0) || fs::exists(r.central(d0))));
      agent.detach(r.sched);
    }
    SiteAgent restarted(r.config, r.source, *r.gated, r.clock);
    restarted.attach(r.sched);
    r.sched.run_until(kMonday + kDay + std::chrono::hours{4});
    CHECK(fs::exists(r.central(d0)));
    CHECK_FALSE(r.local(d0));
    // nothing left behind in the outbox
    for (const auto& e : fs::directory_iterator(r.config.outbox_dir)) {
      CHECK(e.path().filename().string().rfind(".hb-", 0) == 0);
    }
  }
}

TEST_CASE("a full disk halts the recorder after bounded retries") {
  Rig r;
  r.config.write_retries = 2;
  SiteAgent agent(r.config, r.source, *r.gated, r.clock);
  agent.attach(r.sched);
  r.sched.run_until(kMonday + std::chrono::minutes{30});
  CHECK(agent.recorder_alive(r.clock.now()));
  agent.faults().disk_full = true;
  r.sched.run_until(kMonday + std::chrono::minutes{40});
  CHECK(agent.recorder_halted());
  CHECK(agent.counters().write_failures == 3);
  CHECK(r.clock.total_slept() == r.config.write_backoff * 3);  // 1x + 2x
  const auto collect = r.tmp / "inbox" / "hb" / r.config.site_id() / "collect";
  const auto before = from_file_time(fs::last_write_time(collect));
  r.sched.run_until(kMonday + std::chrono::hours{2});
  CHECK_FALSE(agent.recorder_alive(r.clock.now()));
  CHECK(from_file_time(fs::last_write_time(collect)) == before);
  // reachability heartbeats continue
  CHECK(from_file_time(fs::last_write_time(r.tmp / "inbox" / "hb" / r.config.site_id() / "reach")) >
        kMonday + std::chrono::minutes{100});
}

TEST_CASE("config validation") {
  Rig r;
  auto c = r.config;
  CHECK_NOTHROW(validate_agent_config(c));
  c.params.site_id = "hb";
  CHECK_THROWS_AS(validate_agent_config(c), InvalidArgument);
  c = r.config;
  c.archive_hour = 24;
  CHECK_THROWS_AS(validate_agent_config(c), InvalidArgument);
  c = r.config;
  c.compression_level = 0;
  CHECK_THROWS_AS(validate_agent_config(c), InvalidArgument);
  c = r.config;
  c.outbox_dir.clear();
  CHECK(c.resolved_outbox() == r.tmp / ("outbox-" + c.site_id()));
  CHECK(reach_marker_path("a") == "hb/a/reach");
  CHECK(inbox_archive_path("a", {2024, 1, 1}) == "a/a_20240101.lzma-archive");
}
