#include "specmon/demo.hpp"

#include <spdlog/spdlog.h>

#include <json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "specmon/api.hpp"
#include "specmon/error.hpp"
#include "specmon/measure.hpp"
#include "specmon/stats.hpp"
#include "specmon/store.hpp"

namespace specmon {

namespace fs = std::filesystem;

std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::network_block: return "network_block";
    case FaultKind::recorder_halt: return "recorder_halt";
    case FaultKind::transfer_suppress: return "transfer_suppress";
  }
  return "unknown";
}

FaultKind parse_fault_kind(std::string_view name) {
  if (name == "network_block") return FaultKind::network_block;
  if (name == "recorder_halt") return FaultKind::recorder_halt;
  if (name == "transfer_suppress") return FaultKind::transfer_suppress;
  throw InvalidArgument("unknown fault kind: " + std::string(name));
}

FailureType expected_failure(FaultKind k) {
  switch (k) {
    case FaultKind::network_block: return FailureType::unreachable;
    case FaultKind::recorder_halt: return FailureType::collection_stopped;
    case FaultKind::transfer_suppress: return FailureType::archive_missing;
  }
  return FailureType::unreachable;
}

bool DemoResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const DemoCheck& c) { return c.ok; });
}

std::string DemoResult::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) os << (c.ok ? "ok   " : "FAIL ") << c.name << ": " << c.detail << "\n";
  os << "rows=" << rows << " oracle_rows=" << oracle_rows << " alerts=" << alerts.size() << "\n";
  return os.str();
}

std::string site_name(std::size_t index) { return "site" + std::to_string(index + 1); }

Environment demo_environment(std::size_t index, std::uint64_t seed) {
  Environment env;
  env.site_id = site_name(index);
  env.freq_start_hz = 0;
  env.freq_stop_hz = 20'000'000;
  env.rbw_hz = 1'000'000.0;
  env.noise_floor_dbm = -100.0;
  env.noise_sigma_db = 1.5;
  env.seed = seed * 1000 + index;
  env.sweep_time_s = 10.0;

  env.bands.push_back(BandProfile::constant(2'500'000, 3'000'000, -55.0, 1.0));
  BandProfile day;
  day.center_hz = 7'500'000;
  day.bandwidth_hz = 3'000'000;
  day.active_power_dbm = -62.0;
  for (int h = 0; h < 24; ++h) day.activity[static_cast<std::size_t>(h)] = (h >= 8 && h < 19) ? 0.7 : 0.05;
  env.bands.push_back(day);
  BandProfile weekday = BandProfile::constant(17'500'000, 3'000'000, -65.0, 0.3);
  weekday.weekdays = {true, true, true, true, true, false, false};
  env.bands.push_back(weekday);
  return env;
}

namespace {

class RecordingWebhook final : public WebhookClient {
 public:
  int post(const std::string&, const std::string&) override {
    ++posts;
    return 200;
  }
  std::atomic<int> posts{0};
};

struct SiteRig {
  Environment env;
  std::unique_ptr<SimulatedSource> source;
  std::unique_ptr<LocalDirClient> endpoint;
  std::unique_ptr<std::atomic<bool>> blocked;
  std::unique_ptr<GatedClient> gated;
  std::unique_ptr<SiteAgent> agent;
};

}  // namespace

DemoResult run_demo(const DemoOptions& opt) {
  DemoResult result;
  if (opt.scratch_dir.empty()) throw InvalidArgument("demo: scratch_dir must be set");
  if (opt.days < 0) throw InvalidArgument("demo: days must be >= 0");
  for (const auto& f : opt.faults) {
    if (f.site >= opt.n_sites) throw InvalidArgument("demo: fault names site index " + std::to_string(f.site));
  }
  const auto tz = TimeZone::load(opt.timezone);
  fs::create_directories(opt.scratch_dir);
  const auto central = opt.scratch_dir / "central";
  const auto inbox = central / "inbox";
  fs::create_directories(inbox);

  ManualClock clock(opt.start);
  Scheduler scheduler(clock, opt.acceleration);
  Store store(":memory:");

  CollectorConfig cc;
  cc.inbox_root = inbox;
  cc.long_term_root = central / "long-term";
  cc.work_root = central / "work";
  cc.quarantine_root = central / "quarantine";

  MonitorConfig mc = opt.monitor;
  mc.long_term_root = cc.long_term_root;
  mc.webhook_url = "http://demo.invalid/hook";
  RecordingWebhook webhook;
  LocalDirClient monitor_view(inbox, clock);
  Monitor monitor(mc, store, monitor_view, clock, &webhook);
  Collector collector(cc, store, [&](const std::string& site, FailureType type, const std::string& msg) {
    monitor.raise(site, type, msg, clock.now());
  });

  std::vector<SiteRig> rigs(opt.n_sites);
  for (std::size_t i = 0; i < opt.n_sites; ++i) {
    auto& rig = rigs[i];
    rig.env = opt.environment ? opt.environment(i) : demo_environment(i);
    rig.env.site_id = site_name(i);
    rig.env.sweep_time_s = opt.sweep_time_s;
    rig.env.timezone = tz;
    validate_environment(rig.env);

    SiteRecord site;
    site.site_id = rig.env.site_id;
    site.name = "Demo site " + std::to_string(i + 1);
    site.latitude = 39.97 + 0.05 * static_cast<double>(i);
    site.longitude = -105.13 - 0.05 * static_cast<double>(i);
    site.timezone = opt.timezone;
    site.commissioned_at = opt.start;
    store.upsert_site(site);

    AgentConfig ac;
    ac.params.site_id = site.site_id;
    ac.params.freq_start_hz = rig.env.freq_start_hz;
    ac.params.freq_stop_hz = rig.env.freq_stop_hz;
    ac.params.rbw_hz = rig.env.rbw_hz;
    ac.params.sweep_time_s = opt.sweep_time_s;
    ac.params.latitude = site.latitude;
    ac.params.longitude = site.longitude;
    ac.params.antenna_type = "discone";
    ac.params.lna_type = "wideband-20dB";
    ac.params.timezone = opt.timezone;
    ac.params.gate_threshold_dbm = -88.0;
    ac.data_dir = opt.scratch_dir / "sites" / site.site_id / "data";
    ac.outbox_dir = opt.scratch_dir / "sites" / site.site_id / "outbox";
    ac.endpoint = TransferEndpoint{BackendKind::local_dir, inbox.string(), "", "", ""};
    ac.compression_level = opt.compression_level;

    rig.source = std::make_unique<SimulatedSource>(rig.env);
    rig.endpoint = std::make_unique<LocalDirClient>(inbox, clock);
    rig.blocked = std::make_unique<std::atomic<bool>>(false);
    rig.gated = std::make_unique<GatedClient>(*rig.endpoint, *rig.blocked);
    rig.agent = std::make_unique<SiteAgent>(ac, *rig.source, *rig.gated, clock);
    rig.agent->attach(scheduler);
  }

  scheduler.daily(TimeZone::utc(), cc.ingest_hour, [&](Timestamp) { collector.run_all(); });
  monitor.attach(scheduler);
  scheduler.every(mc.check_interval, opt.start + mc.check_interval, [&](Timestamp) {
    for (auto& st : monitor.status_snapshot()) result.status_history.push_back(std::move(st));
  });

  for (const auto& f : opt.faults) {
    auto* rig = &rigs[f.site];
    auto apply = [rig, kind = f.kind](bool on) {
      switch (kind) {
        case FaultKind::network_block: rig->blocked->store(on); break;
        case FaultKind::recorder_halt: on ? rig->agent->halt_recorder() : rig->agent->resume_recorder(); break;
        case FaultKind::transfer_suppress: rig->agent->faults().suppress_archive_upload.store(on); break;
      }
    };
    scheduler.at(opt.start + f.start, [apply](Timestamp) { apply(true); });
    scheduler.at(opt.start + f.start + f.duration, [apply](Timestamp) { apply(false); });
  }

  const auto end = opt.start + opt.days * kDay;
  scheduler.run_until(end);

  // Ordered shutdown: agents (final archive of every recorded day, the partial last UTC day
  // included), collector, monitor.
  const auto cut = utc_midnight(next_day(utc_date(end - Micros{1})));
  for (auto& rig : rigs) {
    rig.agent->detach(scheduler);
    rig.agent->flush();
    rig.agent->daily_archive_job(std::max(end, cut));
    result.counters.push_back(rig.agent->counters());
  }
  auto final_ingest = collector.run_all();
  monitor.flush_notifications();

  // --- checks ---------------------------------------------------------------
  std::map<std::pair<std::string, std::int64_t>, std::size_t> hours_seen;
  for (const auto& r : final_ingest) result.ingests.push_back(r);
  result.rows = store.count_au_rows();

  // Conservation: every day accounted for, rows = hours present x channels.
  std::size_t expected_rows = 0;
  std::size_t failed_ingests = 0;
  for (auto& rig : rigs) {
    const auto dir = opt.scratch_dir / "sites" / rig.env.site_id / "data";
    if (!list_day_dirs(dir).empty()) ++failed_ingests;  // raw data left behind = not archived
  }
  {
    AuQuery all;
    for (auto& rig : rigs) {
      all.site_id = rig.env.site_id;
      const auto rows = store.query_au(all);
      result.records.insert(result.records.end(), rows.begin(), rows.end());
      std::set<std::int64_t> hours;
      for (const auto& r : rows) hours.insert(to_unix_us(r.hour_start));
      const auto grid = build_channel_grid(rig.env.freq_start_hz, rig.env.freq_stop_hz);
      expected_rows += hours.size() * grid.size();
    }
  }
  const bool halts = std::any_of(opt.faults.begin(), opt.faults.end(),
                                 [](const Fault& f) { return f.kind == FaultKind::recorder_halt; });
  const std::size_t full_rows = opt.n_sites * static_cast<std::size_t>(opt.days) * 24 *
                                build_channel_grid(0, 20'000'000).size();
  {
    DemoCheck c{"row-count", false, ""};
    c.ok = failed_ingests == 0 && result.rows == expected_rows && (halts || opt.environment || result.rows == full_rows);
    c.detail = std::to_string(result.rows) + " rows, hours x channels = " + std::to_string(expected_rows) +
               (halts || opt.environment ? "" : ", expected " + std::to_string(full_rows)) +
               (failed_ingests ? ", " + std::to_string(failed_ingests) + " site(s) with unarchived raw data" : "");
    result.checks.push_back(c);
  }

  // Oracle AU: each complete row within the exact binomial interval of the analytic value.
  {
    std::vector<std::pair<AURecord, double>> compared;
    for (auto& rig : rigs) {
      AuQuery q;
      q.site_id = rig.env.site_id;
      const auto per_bin = scale_threshold(ThresholdSpec{}, rig.env.rbw_hz);
      for (const auto& r : store.query_au(q)) {
        if (!r.complete || !r.au_percent) continue;
        try {
          const double p = expected_au(rig.env, Channel{r.channel_start_hz, r.channel_stop_hz}, r.hour_start, per_bin);
          compared.emplace_back(r, p);
        } catch (const UnsupportedConfiguration&) {
        }
      }
    }
    result.oracle_rows = compared.size();
    const double per_row = compared.empty() ? opt.oracle_confidence
                                            : 1.0 - (1.0 - opt.oracle_confidence) / static_cast<double>(compared.size());
    std::size_t bad = 0;
    std::string first_bad;
    for (const auto& [r, p] : compared) {
      const auto iv = binomial_interval(r.total_sweeps, p / 100.0, per_row);
      if (!iv.contains(*r.au_percent)) {
        if (bad++ == 0) {
          first_bad = r.site_id + " " + std::to_string(r.channel_start_hz) + " " + format_rfc3339(r.hour_start) +
                      ": au=" + std::to_string(*r.au_percent) + " expected=" + std::to_string(p);
        }
      }
    }
    result.checks.push_back(DemoCheck{"oracle-au", bad == 0 && (opt.days == 0 || opt.n_sites == 0 || !compared.empty()),
                                      std::to_string(compared.size() - bad) + "/" + std::to_string(compared.size()) +
                                          " rows inside the interval" + (bad ? "; first miss " + first_bad : "")});
  }

  // Alerts: exactly the planned (site, failure type) pairs.
  result.alerts = monitor.alert_log();
  {
    std::set<std::pair<std::string, FailureType>> planned, raised;
    for (const auto& f : opt.faults) planned.insert({site_name(f.site), expected_failure(f.kind)});
    for (const auto& a : result.alerts) raised.insert({a.site_id, a.failure_type});
    std::string detail = std::to_string(result.alerts.size()) + " alert(s) raised, " +
                         std::to_string(planned.size()) + " planned";
    for (const auto& [s, t] : raised) {
      if (!planned.count({s, t})) detail += "; unexpected " + s + "/" + std::string(to_string(t));
    }
    for (const auto& [s, t] : planned) {
      if (!raised.count({s, t})) detail += "; missing " + s + "/" + std::string(to_string(t));
    }
    result.checks.push_back(DemoCheck{"alerts", planned == raised, detail});
  }

  if (opt.check_api) {
    ApiService api(store, clock, ApiConfig{kDay, 10'000, 100'000, HashStrength::minimal});
    const std::string creds = R"({"username":"demo","password":"demo-password"})";
    auto signup = api.handle(ApiRequest{"POST", "/api/signup", {}, {}, creds});
    auto login = api.handle(ApiRequest{"POST", "/api/login", {}, {}, creds});
    bool ok = signup.status == 201 && login.status == 200;
    std::string detail = "signup " + std::to_string(signup.status) + ", login " + std::to_string(login.status);
    if (ok) {
      const auto token = nlohmann::json::parse(login.body).at("token").get<std::string>();
      auto sites = api.handle(ApiRequest{"GET", "/api/sites", {}, {{"Authorization", "Bearer " + token}}, ""});
      const auto listed = nlohmann::json::parse(sites.body);
      ok = sites.status == 200 && listed.is_array() && listed.size() == opt.n_sites;
      detail += ", /api/sites lists " + std::to_string(listed.is_array() ? listed.size() : 0) + " site(s)";
    }
    result.checks.push_back(DemoCheck{"api", ok, detail});
  }
  spdlog::info("demo finished: {} rows, {} alerts, {} webhook posts", result.rows, result.alerts.size(),
               webhook.posts.load());
  return result;
}

}  // namespace specmon
