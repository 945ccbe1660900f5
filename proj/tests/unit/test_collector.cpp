#include <doctest.h>

#include <spdlog/spdlog.h>

#include <fstream>

#include "oracles.hpp"
#include "specmon/agent.hpp"
#include "specmon/archive.hpp"
#include "specmon/collector.hpp"
#include "specmon/demo.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/sweep_io.hpp"

using namespace specmon;
using namespace specmon::testing;
namespace fs = std::filesystem;

namespace {

const Timestamp kMonday = from_unix_us(1'704'067'200'000'000);
const CivilDate kDay0{2024, 1, 1};

struct Rig {
  TempDir tmp{"col"};
  Store store{":memory:"};
  SiteRecord site;
  std::vector<std::tuple<std::string, FailureType, std::string>> alerts;
  std::unique_ptr<Collector> collector;

  Rig() {
    spdlog::set_level(spdlog::level::off);
    site.site_id = "sim";
    site.thresholds_dbm = {-72.0, -80.0};
    store.upsert_site(site);
    CollectorConfig cc{tmp / "inbox", tmp / "lt", tmp / "work", tmp / "q", tmp / "csv", 3};
    collector = std::make_unique<Collector>(cc, store, [this](const std::string& s, FailureType t, const std::string& m) {
      alerts.emplace_back(s, t, m);
    });
  }

  /// Records `hours` of day 0 (minutes listed in `skip` left out) and returns the day folder.
  fs::path record(int hours, int minutes_in_last = 60) {
    auto env = demo_environment(0);
    env.sweep_time_s = 30.0;
    AgentConfig ac;
    ac.params.site_id = "sim";
    ac.params.freq_start_hz = env.freq_start_hz;
    ac.params.freq_stop_hz = env.freq_stop_hz;
    ac.params.rbw_hz = env.rbw_hz;
    ac.params.sweep_time_s = env.sweep_time_s;
    ac.params.gate_threshold_dbm = -96.0;
    ac.data_dir = tmp / "data";
    Recorder rec(ac);
    for (int h = 0; h < hours; ++h) {
      const int minutes = h == hours - 1 ? minutes_in_last : 60;
      for (int k = 0; k < minutes * 2; ++k) {
        rec.record(generate_sweep(env, kMonday + h * kHour + k * std::chrono::seconds{30}));
      }
    }
    rec.flush();
    return day_dir(ac.data_dir, kDay0);
  }

  fs::path deliver(const fs::path& dir) {
    const auto out = tmp / "inbox" / "sim" / archive_name("sim", kDay0);
    fs::create_directories(out.parent_path());
    compress_dir(dir, out, 1);
    return out;
  }
};

}  // namespace

TEST_CASE("ingest: rows, long-term move and CSV") {
  Rig r;
  r.deliver(r.record(5));
  const auto rep = r.collector->ingest_daily("sim", kDay0);
  CHECK(rep.status == IngestStatus::ingested);
  CHECK(rep.hours == 5);
  CHECK(rep.channels == 4);
  CHECK(rep.rows == 5 * 4 * 2);
  CHECK_FALSE(rep.from_long_term);
  CHECK(r.store.count_au_rows("sim") == 40);
  CHECK_FALSE(fs::exists(r.tmp / "inbox" / "sim" / archive_name("sim", kDay0)));
  CHECK(fs::exists(r.tmp / "lt" / "sim" / archive_name("sim", kDay0)));
  CHECK(fs::exists(r.tmp / "csv" / "sim_20240101.csv"));
  CHECK(fs::is_empty(r.tmp / "work" / "sim"));
  CHECK(r.alerts.empty());

  AuQuery q;
  q.site_id = "sim";
  const auto rows = r.store.query_au(q);
  REQUIRE(rows.size() == 20);
  for (const auto& row : rows) {
    CHECK(row.total_sweeps == 120);
    CHECK(row.complete);
    if (row.channel_start_hz == 0) CHECK(*row.au_percent == 100.0);
    if (row.channel_start_hz == 10'000'000) CHECK(*row.au_percent == 0.0);
  }
}

TEST_CASE("re-ingest from long-term storage is idempotent") {
  Rig r;
  r.deliver(r.record(3, 20));
  REQUIRE(r.collector->ingest_daily("sim", kDay0).status == IngestStatus::ingested);
  const auto digest = r.store.au_digest();
  const auto again = r.collector->ingest_daily("sim", kDay0);
  CHECK(again.status == IngestStatus::ingested);
  CHECK(again.from_long_term);
  CHECK(r.store.au_digest() == digest);
  CHECK(r.store.count_au_rows() == 3 * 4 * 2);
}

TEST_CASE("a partial hour is kept but marked incomplete") {
  Rig r;
  const auto dir = r.record(2, 30);
  SiteRecord s = r.site;
  s.thresholds_dbm = {-72.0};
  std::size_t hours = 0, channels = 0;
  const auto rows = analyze_day_dir(dir, s, &hours, &channels);
  CHECK(hours == 2);
  CHECK(channels == 4);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].complete);
  CHECK_FALSE(rows[4].complete);
  CHECK(rows[4].total_sweeps == 60);
  CHECK(rows[4].au_percent.has_value());
}

TEST_CASE("a gate above the analysis threshold is rejected") {
  Rig r;
  const auto dir = r.record(1);
  SiteRecord s = r.site;
  s.thresholds_dbm = {-90.0};  // -103 dBm per 1 MHz bin, below the -96 gate
  CHECK_THROWS(analyze_day_dir(dir, s));
}

TEST_CASE("corrupt archives are quarantined and alerted") {
  Rig r;
  const auto arc = r.deliver(r.record(1));
  auto bytes = read_file(arc);
  bytes[bytes.size() / 2] ^= 0x11;
  write_file_atomic(arc, bytes);
  const auto rep = r.collector->ingest_daily("sim", kDay0);
  CHECK(rep.status == IngestStatus::integrity_error);
  CHECK(fs::exists(r.tmp / "q" / "sim" / archive_name("sim", kDay0)));
  CHECK_FALSE(fs::exists(arc));
  REQUIRE(r.alerts.size() == 1);
  CHECK(std::get<1>(r.alerts[0]) == FailureType::archive_missing);
  CHECK(r.store.count_au_rows() == 0);
}

TEST_CASE("missing archive and unregistered site") {
  Rig r;
  CHECK(r.collector->ingest_daily("sim", kDay0).status == IngestStatus::missing);
  const auto out = r.tmp / "inbox" / "ghost" / archive_name("ghost", kDay0);
  fs::create_directories(out.parent_path());
  compress_dir(r.record(1), out, 1);
  CHECK(r.collector->ingest_daily("ghost", kDay0).status == IngestStatus::analysis_error);
  CHECK(fs::exists(out));  // left in place for a later retry
}

TEST_CASE("run_all ingests every archive oldest first and skips temp files") {
  Rig r;
  const auto dir = r.record(1);
  fs::create_directories(r.tmp / "inbox" / "sim");
  const CivilDate d1{2024, 1, 2};
  // the same content under a later day is still a valid archive for that day
  compress_dir(dir, r.tmp / "inbox" / "sim" / archive_name("sim", d1), 1);
  r.deliver(dir);
  std::ofstream(r.tmp / "inbox" / "sim" / ".tmp.99.sim_20240103.lzma-archive") << "partial";
  const auto reps = r.collector->run_all();
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].day == kDay0);
  CHECK(reps[1].day == d1);
}

TEST_CASE("move_to_long_term keeps the mtime") {
  Rig r;
  const auto arc = r.deliver(r.record(1));
  const auto stamp = to_file_time(kMonday + kDay);
  fs::last_write_time(arc, stamp);
  const auto dest = r.collector->move_to_long_term(arc, "sim");
  CHECK(dest == r.tmp / "lt" / "sim" / archive_name("sim", kDay0));
  CHECK(fs::last_write_time(dest) == stamp);
  CHECK_FALSE(fs::exists(arc));
}
