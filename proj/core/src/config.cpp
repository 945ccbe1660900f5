#include "specmon/config.hpp"

#include <cmath>
#include <cstdlib>

#include "json_reader.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"

namespace specmon {

namespace fs = std::filesystem;
using detail::ObjectReader;

namespace {

Micros seconds_field(ObjectReader& r, const std::string& key, Micros fallback) {
  const double s = r.get_or<double>(key, std::chrono::duration<double>(fallback).count());
  if (!std::isfinite(s)) r.fail(key, "expected a finite number of seconds");
  return Micros{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

fs::path path_field(ObjectReader& r, const std::string& key, const fs::path& base, bool required = true) {
  std::optional<std::string> v;
  if (required) {
    v = r.get<std::string>(key);
  } else {
    v = r.get_optional<std::string>(key);
  }
  if (!v) return {};
  if (v->empty()) r.fail(key, "path must not be empty");
  fs::path p(*v);
  return p.is_absolute() ? p : base / p;
}

/// Runs a domain validator and reports its message at `pointer`.
template <typename Fn>
void check(const ObjectReader& r, const std::string& key, Fn fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    r.fail(key, e.what());
  }
}

SiteParams parse_site_params(ObjectReader r) {
  SiteParams p;
  p.site_id = r.get<std::string>("site_id");
  p.freq_start_hz = r.get<Hz>("freq_start_hz");
  p.freq_stop_hz = r.get<Hz>("freq_stop_hz");
  p.rbw_hz = r.get<double>("rbw_hz");
  p.sweep_time_s = r.get<double>("sweep_time_s");
  p.latitude = r.get_or<double>("latitude", 0.0);
  p.longitude = r.get_or<double>("longitude", 0.0);
  p.antenna_type = r.get_or<std::string>("antenna_type", "");
  p.lna_type = r.get_or<std::string>("lna_type", "");
  p.timezone = r.get_or<std::string>("timezone", "UTC");
  p.gate_threshold_dbm = r.get_or<double>("gate_threshold_dbm", -90.0);
  r.finish();
  check(r, "", [&] { validate_site_params(p); });
  if (!is_resolvable_timezone(p.timezone)) r.fail("timezone", "unknown time zone '" + p.timezone + "'");
  return p;
}

TransferEndpoint parse_endpoint(ObjectReader r, const fs::path& base) {
  TransferEndpoint e;
  const auto kind = r.get<std::string>("kind");
  if (kind == "local_dir") {
    e.kind = BackendKind::local_dir;
    e.address = path_field(r, "root", base).string();
  } else if (kind == "ftp") {
    e.kind = BackendKind::ftp;
    e.address = r.get<std::string>("url");
    if (!e.address.starts_with("ftp://")) r.fail("url", "expected an ftp:// URL");
    e.username = r.get_or<std::string>("username", "");
    e.password = r.get_or<std::string>("password", "");
  } else {
    r.fail("kind", "expected 'local_dir' or 'ftp'");
  }
  e.base_path = r.get_or<std::string>("base_path", "");
  r.finish();
  apply_credential_env(e);
  return e;
}

CalibrationTable parse_calibration(const nlohmann::json& j, const ObjectReader& parent) {
  if (!j.is_array()) parent.fail("calibration", "expected an array of {freq_hz, offset_db}");
  CalibrationTable t;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ObjectReader p(j[i], parent.source(), parent.path("calibration") + "/" + std::to_string(i));
    t.points.push_back(CalibrationPoint{p.get<Hz>("freq_hz"), p.get<double>("offset_db")});
    p.finish();
  }
  check(parent, "calibration", [&] { validate_calibration(t); });
  return t;
}

SourceConfig parse_source(ObjectReader r, const fs::path& base) {
  SourceConfig s;
  const auto kind = r.get<std::string>("kind");
  if (kind == "simulated") {
    s.kind = SourceKind::simulated;
    const auto& env = r.raw("environment");
    try {
      if (env.is_string()) {
        fs::path p(env.get<std::string>());
        s.environment = load_environment(p.is_absolute() ? p : base / p);
      } else {
        s.environment = parse_environment(env.dump(), r.source() + ":" + r.path("environment"));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.fail("environment", e.what());
    }
  } else if (kind == "replay") {
    s.kind = SourceKind::replay;
    s.replay_dir = path_field(r, "dir", base);
  } else {
    r.fail("kind", "expected 'simulated' or 'replay'");
  }
  r.finish();
  return s;
}

AgentConfig parse_agent(ObjectReader r, const SiteParams& params, const fs::path& base) {
  AgentConfig a;
  a.params = params;
  a.data_dir = path_field(r, "data_dir", base);
  a.outbox_dir = path_field(r, "outbox_dir", base, false);
  a.endpoint = parse_endpoint(r.child("endpoint"), base);
  a.heartbeat_interval = seconds_field(r, "heartbeat_interval_s", a.heartbeat_interval);
  a.archive_hour = r.get_or<int>("archive_hour", a.archive_hour);
  a.archive_retry_interval = seconds_field(r, "archive_retry_interval_s", a.archive_retry_interval);
  a.write_retries = r.get_or<int>("write_retries", a.write_retries);
  a.write_backoff = seconds_field(r, "write_backoff_s", a.write_backoff);
  a.compression_level = r.get_or<int>("compression_level", a.compression_level);
  if (r.has("calibration")) a.calibration = parse_calibration(r.raw("calibration"), r);
  r.finish();
  check(r, "", [&] { validate_agent_config(a); });
  return a;
}

SiteRecord parse_site_record(ObjectReader r) {
  SiteRecord s;
  s.site_id = r.get<std::string>("site_id");
  s.name = r.get_or<std::string>("name", s.site_id);
  s.latitude = r.get_or<double>("latitude", 0.0);
  s.longitude = r.get_or<double>("longitude", 0.0);
  s.timezone = r.get_or<std::string>("timezone", "UTC");
  s.channel_width_hz = r.get_or<Hz>("channel_width_hz", kDefaultChannelWidth);
  s.thresholds_dbm = r.get_or<std::vector<double>>("thresholds_dbm", {kDefaultReferencePower});
  s.min_coverage = r.get_or<double>("min_coverage", kDefaultMinCoverage);
  if (auto c = r.get_optional<std::string>("commissioned_at")) {
    try {
      s.commissioned_at = parse_rfc3339(*c);
    } catch (const std::exception& e) {
      r.fail("commissioned_at", e.what());
    }
  }
  r.finish();
  if (s.site_id.empty() || s.site_id == "hb" || s.site_id.find_first_of("/\\_ ") != std::string::npos) {
    r.fail("site_id", "must be non-empty, not 'hb', and contain no '/', '\\', '_' or spaces");
  }
  if (!is_resolvable_timezone(s.timezone)) r.fail("timezone", "unknown time zone '" + s.timezone + "'");
  if (s.channel_width_hz <= 0) r.fail("channel_width_hz", "must be > 0");
  if (s.thresholds_dbm.empty()) r.fail("thresholds_dbm", "must list at least one threshold");
  if (s.min_coverage < 0.0 || s.min_coverage > 1.0) r.fail("min_coverage", "must be in [0, 1]");
  return s;
}

CentralConfig parse_central(ObjectReader r, const fs::path& base) {
  CentralConfig c;
  c.collector.inbox_root = path_field(r, "inbox_root", base);
  c.collector.long_term_root = path_field(r, "long_term_root", base);
  c.collector.work_root = path_field(r, "work_root", base);
  c.collector.quarantine_root = path_field(r, "quarantine_root", base, false);
  if (auto csv = path_field(r, "csv_dir", base, false); !csv.empty()) c.collector.csv_dir = csv;
  c.collector.ingest_hour = r.get_or<int>("ingest_hour", c.collector.ingest_hour);
  if (c.collector.ingest_hour < 0 || c.collector.ingest_hour > 23) r.fail("ingest_hour", "must be in 0..23");
  const auto db = r.get<std::string>("database");
  c.database = db == ":memory:" ? fs::path(db) : (fs::path(db).is_absolute() ? fs::path(db) : base / db);
  r.finish();
  return c;
}

MonitorConfig parse_monitor(ObjectReader& r, const fs::path& long_term_root) {
  MonitorConfig m;
  m.check_interval = seconds_field(r, "check_interval_s", m.check_interval);
  m.heartbeat_window = seconds_field(r, "heartbeat_window_s", m.heartbeat_window);
  m.archive_max_age = seconds_field(r, "archive_max_age_s", m.archive_max_age);
  m.archive_grace = seconds_field(r, "archive_grace_s", m.archive_grace);
  m.webhook_url = r.get_or<std::string>("webhook_url", "");
  m.notify_attempts = r.get_or<int>("notify_attempts", m.notify_attempts);
  m.notify_backoff = seconds_field(r, "notify_backoff_s", m.notify_backoff);
  m.long_term_root = long_term_root;
  return m;
}

ApiConfig parse_api(ObjectReader& r) {
  ApiConfig a;
  a.session_ttl = seconds_field(r, "session_ttl_s", a.session_ttl);
  a.default_page_size = r.get_or<std::size_t>("default_page_size", a.default_page_size);
  a.max_page_size = r.get_or<std::size_t>("max_page_size", a.max_page_size);
  const auto strength = r.get_or<std::string>("hash_strength", "interactive");
  if (strength == "interactive") {
    a.hash_strength = HashStrength::interactive;
  } else if (strength == "minimal") {
    a.hash_strength = HashStrength::minimal;
  } else {
    r.fail("hash_strength", "expected 'interactive' or 'minimal'");
  }
  if (a.session_ttl <= Micros::zero()) r.fail("session_ttl_s", "must be > 0");
  if (a.default_page_size == 0 || a.default_page_size > a.max_page_size) {
    r.fail("default_page_size", "must be in 1..max_page_size");
  }
  return a;
}

ClockConfig parse_clock(ObjectReader r) {
  ClockConfig c;
  const auto mode = r.get_or<std::string>("mode", "wall");
  if (mode == "wall") {
    c.mode = ClockMode::wall;
  } else if (mode == "accelerated") {
    c.mode = ClockMode::accelerated;
  } else {
    r.fail("mode", "expected 'wall' or 'accelerated'");
  }
  if (auto s = r.get_optional<std::string>("start")) {
    try {
      c.start = parse_rfc3339(*s);
    } catch (const std::exception& e) {
      r.fail("start", e.what());
    }
  }
  c.acceleration = r.get_or<double>("acceleration", 0.0);
  if (c.acceleration < 0.0) r.fail("acceleration", "must be >= 0");
  c.duration = seconds_field(r, "duration_s", c.duration);
  if (c.duration <= Micros::zero()) r.fail("duration_s", "must be > 0");
  r.finish();
  return c;
}

}  // namespace

void apply_credential_env(TransferEndpoint& e) {
  if (const char* u = std::getenv("SPECMON_FTP_USER"); u && *u) e.username = u;
  if (const char* p = std::getenv("SPECMON_FTP_PASSWORD"); p && *p) e.password = p;
}

AppConfig parse_config(std::string_view text, const fs::path& source_file) {
  const auto source = source_file.string();
  const auto j = detail::parse_json_text(text, source);
  ObjectReader root(j, source);
  const auto base = source_file.has_parent_path() ? source_file.parent_path() : fs::path(".");

  AppConfig cfg;
  cfg.source_file = source_file;
  std::optional<SiteParams> params;
  if (root.has("site")) params = parse_site_params(root.child("site"));
  if (root.has("agent")) {
    if (!params) root.fail("agent", "requires a 'site' section");
    cfg.agent = parse_agent(root.child("agent"), *params, base);
  }
  if (root.has("source")) cfg.source = parse_source(root.child("source"), base);
  if (root.has("central")) cfg.central = parse_central(root.child("central"), base);
  if (root.has("sites")) {
    const auto& arr = root.raw("sites");
    if (!arr.is_array()) root.fail("sites", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.sites.push_back(parse_site_record(ObjectReader(arr[i], source, "/sites/" + std::to_string(i))));
      for (std::size_t k = 0; k + 1 < cfg.sites.size(); ++k) {
        if (cfg.sites[k].site_id == cfg.sites.back().site_id) {
          root.fail("sites/" + std::to_string(i), "duplicate site_id '" + cfg.sites.back().site_id + "'");
        }
      }
    }
  }
  if (root.has("monitor")) {
    auto r = root.child("monitor");
    cfg.monitor = parse_monitor(r, cfg.central ? cfg.central->collector.long_term_root : fs::path());
    if (r.has("endpoint")) cfg.monitor_endpoint = parse_endpoint(r.child("endpoint"), base);
    r.finish();
    check(r, "", [&] { validate_monitor_config(*cfg.monitor); });
    if (!cfg.monitor_endpoint) {
      if (!cfg.central) r.fail("endpoint", "required when there is no 'central' section");
      cfg.monitor_endpoint = TransferEndpoint{BackendKind::local_dir, cfg.central->collector.inbox_root.string(), "",
                                              "", ""};
    }
  }
  if (root.has("api")) {
    auto r = root.child("api");
    cfg.api = parse_api(r);
    cfg.api_host = r.get_or<std::string>("host", cfg.api_host);
    cfg.api_port = r.get_or<int>("port", cfg.api_port);
    if (cfg.api_port < 0 || cfg.api_port > 65535) r.fail("port", "must be in 0..65535");
    r.finish();
  }
  if (root.has("clock")) cfg.clock = parse_clock(root.child("clock"));
  root.finish();
  return cfg;
}

AppConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(path.string(), "", std::string("cannot read config: ") + e.what());
  }
  return parse_config(text, path);
}

}  // namespace specmon
