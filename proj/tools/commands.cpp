#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <cmath>
#include <iostream>
#include <thread>

#include <unistd.h>

#include "specmon/agent.hpp"
#include "specmon/api.hpp"
#include "specmon/collector.hpp"
#include "specmon/config.hpp"
#include "specmon/demo.hpp"
#include "specmon/error.hpp"
#include "specmon/monitor.hpp"
#include "specmon/sim.hpp"
#include "specmon/store.hpp"
#include "specmon/sweep_io.hpp"
#include "specmon/transfer.hpp"

namespace specmon::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<Scheduler*> g_scheduler{nullptr};
std::atomic<ApiServer*> g_server{nullptr};

std::atomic<bool> g_stop_requested{false};

void on_signal(int) { g_stop_requested.store(true); }

/// The handler only sets a flag; a watcher thread does the actual shutdown.
void install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread([] {
    while (!g_stop_requested.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (auto* s = g_scheduler.load()) s->stop();
    if (auto* a = g_server.load()) a->stop();
  }).detach();
}

Timestamp parse_start(const std::string& s, Timestamp fallback) { return s.empty() ? fallback : parse_rfc3339(s); }

const AppConfig& require(const AppConfig& cfg, bool present, const char* section) {
  if (!present) throw ConfigError(cfg.source_file.string(), std::string("/") + section, "section is required");
  return cfg;
}

std::unique_ptr<Store> open_store(const AppConfig& cfg) {
  require(cfg, cfg.central.has_value(), "central");
  if (cfg.central->database != ":memory:" && cfg.central->database.has_parent_path()) {
    fs::create_directories(cfg.central->database.parent_path());
  }
  auto store = std::make_unique<Store>(cfg.central->database.string());
  for (const auto& s : cfg.sites) store->upsert_site(s);
  return store;
}

void print_report(const IngestReport& r) {
  std::cout << r.site_id << " " << format_iso_date(r.day) << " " << to_string(r.status) << " rows=" << r.rows
            << " hours=" << r.hours << " channels=" << r.channels;
  if (!r.message.empty()) std::cout << " (" << r.message << ")";
  if (!r.long_term_error.empty()) std::cout << " long-term: " << r.long_term_error;
  std::cout << "\n";
}

int report_code(const std::vector<IngestReport>& reports) {
  for (const auto& r : reports) {
    if (r.status == IngestStatus::integrity_error || r.status == IngestStatus::analysis_error) return kExitCheckFailed;
    if (!r.long_term_error.empty()) return kExitCheckFailed;
  }
  return kExitOk;
}

/// Monitor used to record collector-side alerts; its detectors are not scheduled here.
std::unique_ptr<Monitor> alert_recorder(const AppConfig& cfg, Store& store, TransferClient& inbox, Clock& clock,
                                        WebhookClient* webhook) {
  MonitorConfig mc = cfg.monitor.value_or(MonitorConfig{});
  mc.long_term_root = cfg.central->collector.long_term_root;
  return std::make_unique<Monitor>(mc, store, inbox, clock, webhook);
}

}  // namespace

int run_simulate(const SimulateArgs& a) {
  Environment env = a.env_file.empty() ? demo_environment(0) : load_environment(a.env_file);
  if (a.hours <= 0) throw InvalidArgument("--hours: must be > 0");
  AgentConfig ac;
  ac.params.site_id = env.site_id;
  ac.params.freq_start_hz = env.freq_start_hz;
  ac.params.freq_stop_hz = env.freq_stop_hz;
  ac.params.rbw_hz = env.rbw_hz;
  ac.params.sweep_time_s = env.sweep_time_s;
  ac.params.timezone = env.timezone.name();
  ac.params.gate_threshold_dbm = a.gate_dbm;
  ac.data_dir = a.out_dir;
  validate_agent_config(ac);
  fs::create_directories(a.out_dir);

  const auto start = parse_start(a.start, from_unix_us(1'704'067'200'000'000));
  const auto end = start + Micros{static_cast<std::int64_t>(std::llround(a.hours * 3600e6))};
  const auto step = Micros{static_cast<std::int64_t>(std::llround(env.sweep_time_s * 1e6))};
  SimulatedSource source(env);
  std::uint64_t sweeps = 0;
  {
    Recorder rec(ac);
    for (auto t = start; t < end; t += step) {
      rec.record(*source.next(t));
      ++sweeps;
    }
    rec.flush();
  }
  std::size_t minute_files = 0;
  for (const auto day : list_day_dirs(a.out_dir)) minute_files += scan_day_dir(day_dir(a.out_dir, day)).data_files.size();
  std::cout << "wrote " << sweeps << " sweeps into " << minute_files << " minute files under " << a.out_dir.string()
            << "\n";
  return kExitOk;
}

int run_agent(const AgentArgs& a) {
  const auto cfg = load_config(a.config);
  require(cfg, cfg.agent.has_value(), "agent");
  require(cfg, cfg.source.has_value(), "source");
  const bool accelerated = a.clock.empty() ? cfg.clock.mode == ClockMode::accelerated : a.clock == "accelerated";

  std::unique_ptr<SweepSource> source;
  if (cfg.source->kind == SourceKind::simulated) {
    auto env = *cfg.source->environment;
    env.site_id = cfg.agent->site_id();
    env.sweep_time_s = cfg.agent->params.sweep_time_s;
    source = std::make_unique<SimulatedSource>(env);
  } else {
    source = std::make_unique<ReplaySource>(cfg.source->replay_dir, cfg.agent->site_id());
  }

  WallClock wall;
  ManualClock manual(cfg.clock.start == Timestamp{} ? floor_minute(wall.now()) : cfg.clock.start);
  Clock& clock = accelerated ? static_cast<Clock&>(manual) : wall;
  auto client = make_transfer_client(cfg.agent->endpoint, clock);
  SiteAgent agent(*cfg.agent, *source, *client, clock);
  Scheduler scheduler(clock, accelerated ? cfg.clock.acceleration : 0.0);
  agent.attach(scheduler);
  g_scheduler = &scheduler;
  install_signal_handlers();
  spdlog::info("agent {} running ({} clock)", cfg.agent->site_id(), accelerated ? "accelerated" : "wall");
  if (accelerated) {
    scheduler.run_until(clock.now() + cfg.clock.duration);
  } else {
    scheduler.run_until(Timestamp::max());
  }
  g_scheduler = nullptr;
  agent.flush();
  const auto c = agent.counters();
  std::cout << "sweeps=" << c.sweeps_seen << " stored=" << c.sweeps_stored << " archives=" << c.archives_uploaded
            << " reach_uploads=" << c.reach_uploads << " collect_uploads=" << c.collect_uploads << "\n";
  return agent.recorder_halted() ? kExitCheckFailed : kExitOk;
}

int run_collector_ingest(const CollectorArgs& a) {
  const auto cfg = load_config(a.config);
  auto store = open_store(cfg);
  WallClock clock;
  LocalDirClient inbox(cfg.central->collector.inbox_root, clock);
  HttpWebhookClient webhook;
  auto monitor = alert_recorder(cfg, *store, inbox, clock, &webhook);
  Collector collector(cfg.central->collector, *store, [&](const std::string& s, FailureType t, const std::string& m) {
    monitor->raise(s, t, m, clock.now());
  });
  const auto report = collector.ingest_daily(a.site, parse_date(a.day));
  print_report(report);
  monitor->flush_notifications();
  return report_code({report});
}

int run_collector_all(const CollectorArgs& a) {
  const auto cfg = load_config(a.config);
  auto store = open_store(cfg);
  WallClock clock;
  LocalDirClient inbox(cfg.central->collector.inbox_root, clock);
  HttpWebhookClient webhook;
  auto monitor = alert_recorder(cfg, *store, inbox, clock, &webhook);
  Collector collector(cfg.central->collector, *store, [&](const std::string& s, FailureType t, const std::string& m) {
    monitor->raise(s, t, m, clock.now());
  });
  const auto reports = collector.run_all();
  for (const auto& r : reports) print_report(r);
  if (reports.empty()) std::cout << "inbox is empty\n";
  monitor->flush_notifications();
  return report_code(reports);
}

int run_monitor(const MonitorArgs& a) {
  const auto cfg = load_config(a.config);
  require(cfg, cfg.monitor.has_value(), "monitor");
  auto store = open_store(cfg);
  WallClock clock;
  auto inbox = make_transfer_client(*cfg.monitor_endpoint, clock);
  HttpWebhookClient webhook;
  Monitor monitor(*cfg.monitor, *store, *inbox, clock, &webhook);
  if (a.once) {
    monitor.check_all(clock.now());
    monitor.flush_notifications();
    for (const auto& s : monitor.status_snapshot()) {
      std::cout << s.site_id << " " << summarize(s) << " reach=" << to_string(s.reachability)
                << " collect=" << to_string(s.collection) << " archive=" << to_string(s.archive) << "\n";
    }
    return monitor.open_alerts().empty() ? kExitOk : kExitCheckFailed;
  }
  Scheduler scheduler(clock);
  monitor.attach(scheduler);
  g_scheduler = &scheduler;
  install_signal_handlers();
  spdlog::info("monitor running: every {} s, window {} s", std::chrono::duration_cast<std::chrono::seconds>(cfg.monitor->check_interval).count(),
               std::chrono::duration_cast<std::chrono::seconds>(cfg.monitor->heartbeat_window).count());
  scheduler.run_until(Timestamp::max());
  g_scheduler = nullptr;
  monitor.flush_notifications();
  return kExitOk;
}

int run_serve(const ServeArgs& a) {
  const auto cfg = load_config(a.config);
  auto store = open_store(cfg);
  WallClock clock;
  ApiService service(*store, clock, cfg.api.value_or(ApiConfig{}));
  const int port = a.port.value_or(cfg.api_port);
  if (port < 0 || port > 65535) throw InvalidArgument("--port: must be in 0..65535");
  ApiServer server(service, cfg.api_host, port);
  g_server = &server;
  install_signal_handlers();
  spdlog::info("serving on http://{}:{}", cfg.api_host, port);
  server.run();
  g_server = nullptr;
  return kExitOk;
}

int run_demo_command(const DemoArgs& a) {
  DemoOptions opt;
  opt.n_sites = a.sites;
  opt.days = a.days;
  opt.acceleration = a.acceleration;
  opt.scratch_dir = a.scratch.empty() ? fs::temp_directory_path() / ("specmon-demo-" + std::to_string(::getpid()))
                                      : a.scratch;
  opt.sweep_time_s = a.sweep_time_s;
  opt.compression_level = a.compression_level;
  for (const auto& spec : a.faults) {
    // <site>:<kind>:<start_hours>:<duration_hours>
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      const auto colon = spec.find(':', pos);
      parts.push_back(spec.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos));
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
    if (parts.size() != 4) throw InvalidArgument("--fault: expected site:kind:start_h:duration_h, got " + spec);
    Fault f;
    std::size_t idx = opt.n_sites;
    for (std::size_t i = 0; i < opt.n_sites; ++i) {
      if (site_name(i) == parts[0]) idx = i;
    }
    if (idx == opt.n_sites) throw InvalidArgument("--fault: unknown site " + parts[0]);
    f.site = idx;
    f.kind = parse_fault_kind(parts[1]);
    f.start = Micros{static_cast<std::int64_t>(std::stod(parts[2]) * 3600e6)};
    f.duration = Micros{static_cast<std::int64_t>(std::stod(parts[3]) * 3600e6)};
    opt.faults.push_back(f);
  }
  const auto result = run_demo(opt);
  std::cout << result.summary();
  std::cout << "scratch: " << opt.scratch_dir.string() << "\n";
  return result.ok() ? kExitOk : kExitCheckFailed;
}

}  // namespace specmon::cli
