#include "specmon/agent.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "specmon/archive.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/measure.hpp"

namespace specmon {

namespace fs = std::filesystem;

fs::path AgentConfig::resolved_outbox() const {
  if (!outbox_dir.empty()) return outbox_dir;
  return data_dir.parent_path() / ("outbox-" + params.site_id);
}

void validate_agent_config(const AgentConfig& c) {
  validate_site_params(c.params);
  if (c.params.site_id == "hb") throw InvalidArgument("site_id: 'hb' is reserved for heartbeat markers");
  if (c.data_dir.empty()) throw InvalidArgument("data_dir: must be set");
  if (c.heartbeat_interval <= Micros::zero()) throw InvalidArgument("heartbeat_interval: must be > 0");
  if (c.archive_hour < 0 || c.archive_hour > 23) throw InvalidArgument("archive_hour: must be in 0..23");
  if (c.archive_retry_interval <= Micros::zero()) throw InvalidArgument("archive_retry_interval: must be > 0");
  if (c.write_retries < 0) throw InvalidArgument("write_retries: must be >= 0");
  if (c.compression_level < 1 || c.compression_level > 9) throw InvalidArgument("compression_level: must be in 1..9");
  if (c.calibration) validate_calibration(*c.calibration);
  if (!is_resolvable_timezone(c.params.timezone)) throw InvalidArgument("timezone: unknown zone " + c.params.timezone);
}

std::string reach_marker_path(const std::string& site_id) { return "hb/" + site_id + "/reach"; }
std::string collect_marker_path(const std::string& site_id) { return "hb/" + site_id + "/collect"; }
std::string inbox_archive_path(const std::string& site_id, CivilDate day) {
  return site_id + "/" + archive_name(site_id, day);
}

// --- Recorder --------------------------------------------------------------

Recorder::Recorder(const AgentConfig& config) : config_(config) {}

Recorder::~Recorder() {
  try {
    flush();
  } catch (const std::exception& e) {
    spdlog::error("recorder: final flush failed: {}", e.what());
  }
}

void Recorder::open(Timestamp minute) {
  const auto hour = floor_hour(minute);
  const auto dir = day_dir(config_.data_dir, utc_date(minute));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  if (params_hour_ != hour) {
    auto params = config_.params;
    write_params(params_path(config_.data_dir, hour), params);
    params_hour_ = hour;
  }
  writer_ = MinuteFileWriter(minute_data_path(config_.data_dir, minute));
  manifest_ = MinuteManifest{minute, 0, 0};
  minute_ = minute;
}

void Recorder::close_minute() {
  if (!minute_) return;
  writer_.close();
  write_manifest(manifest_path(config_.data_dir, *minute_), manifest_);
  minute_.reset();
}

void Recorder::record(const Sweep& raw) {
  Sweep sweep = config_.calibration ? apply_calibration(raw, *config_.calibration) : raw;
  if (config_.calibration) {
    for (auto& b : sweep.bins) b.power_dbm = static_cast<float>(b.power_dbm);
  }
  const auto minute = floor_minute(sweep.start_time);
  if (minute_ && *minute_ != minute) close_minute();
  if (!minute_) {
    if (before_write) before_write();
    open(minute);
  }
  const bool store = any_bin_above(sweep, config_.params.gate_threshold_dbm);
  if (store) {
    if (before_write) before_write();
    writer_.append(sweep);
  }
  // Counted only once the write went through, so a retried call does not double count.
  ++manifest_.total_sweeps;
  if (store) {
    ++manifest_.stored_sweeps;
    ++stored_total_;
  }
}

void Recorder::close_before(Timestamp t) {
  if (minute_ && *minute_ + kMinute <= t) close_minute();
}

void Recorder::flush() { close_minute(); }

// --- SiteAgent -------------------------------------------------------------

SiteAgent::SiteAgent(AgentConfig config, SweepSource& source, TransferClient& client, Clock& clock)
    : config_(std::move(config)), source_(source), client_(client), clock_(clock), recorder_(config_) {
  validate_agent_config(config_);
  fs::create_directories(config_.data_dir);
  fs::create_directories(config_.resolved_outbox());
  recorder_.before_write = [this] {
    if (faults_.disk_full.load()) throw IoError("no space left on device (injected)");
  };
}

SiteAgent::~SiteAgent() = default;

void SiteAgent::attach(Scheduler& s) {
  const auto now = s.now();
  const auto sweep_period = Micros{static_cast<std::int64_t>(std::llround(config_.params.sweep_time_s * 1e6))};
  const auto tz = TimeZone::load(config_.params.timezone);
  auto guarded = [this](const char* what, auto fn) {
    return [this, what, fn](Timestamp t) {
      try {
        fn(t);
      } catch (const SimulatedCrash&) {
        throw;
      } catch (const std::exception& e) {
        spdlog::error("agent {}: {} failed: {}", config_.site_id(), what, e.what());
      }
    };
  };
  tasks_.push_back(s.every(sweep_period, now, guarded("record", [this](Timestamp t) { record_tick(t); })));
  tasks_.push_back(s.every(config_.heartbeat_interval, now, guarded("heartbeat", [this](Timestamp t) {
    emit_reachability_heartbeat(t);
    emit_collection_heartbeat(t);
  })));
  tasks_.push_back(s.daily(tz, config_.archive_hour,
                           guarded("archive", [this](Timestamp t) { daily_archive_job(t); })));
  tasks_.push_back(s.every(config_.archive_retry_interval, now + config_.archive_retry_interval,
                           guarded("archive-retry", [this](Timestamp t) {
                             bool pending;
                             {
                               std::lock_guard lock(mu_);
                               pending = archive_retry_pending_;
                             }
                             if (pending) daily_archive_job(t);
                           })));
}

void SiteAgent::detach(Scheduler& s) {
  for (auto id : tasks_) s.cancel(id);
  tasks_.clear();
}

void SiteAgent::record_tick(Timestamp now) {
  if (halted_.load()) return;
  auto sweep = source_.next(now);
  if (!sweep) return;
  if (sweep->site_id.empty()) sweep->site_id = config_.site_id();
  std::lock_guard lock(mu_);
  ++counters_.sweeps_seen;
  for (int attempt = 0;; ++attempt) {
    try {
      const auto before = recorder_.stored();
      recorder_.record(*sweep);
      if (recorder_.stored() != before) ++counters_.sweeps_stored;
      last_progress_ = now;
      return;
    } catch (const IoError& e) {
      ++counters_.write_failures;
      if (attempt >= config_.write_retries) {
        spdlog::error("agent {}: write failed {} times, halting recorder: {}", config_.site_id(), attempt + 1,
                      e.what());
        halted_.store(true);
        try {
          recorder_.flush();
        } catch (const std::exception&) {
        }
        return;
      }
      clock_.sleep_for(config_.write_backoff * (1 << attempt));
    }
  }
}

void SiteAgent::upload_marker(const std::string& remote, Timestamp now, std::uint64_t& attempts,
                              std::uint64_t& uploads) {
  const auto local = config_.resolved_outbox() / (".hb-" + remote.substr(remote.rfind('/') + 1));
  ++attempts;
  try {
    write_file_atomic(local, format_rfc3339(now) + "\n");
    client_.put_file(local, remote);
    ++uploads;
  } catch (const TransferError& e) {
    spdlog::debug("agent {}: heartbeat {} not delivered: {}", config_.site_id(), remote, e.what());
  } catch (const std::exception& e) {
    spdlog::warn("agent {}: heartbeat {} failed: {}", config_.site_id(), remote, e.what());
  }
}

void SiteAgent::emit_reachability_heartbeat(Timestamp now) {
  std::lock_guard lock(mu_);
  upload_marker(reach_marker_path(config_.site_id()), now, counters_.reach_attempts, counters_.reach_uploads);
}

void SiteAgent::emit_collection_heartbeat(Timestamp now) {
  std::lock_guard lock(mu_);
  if (halted_.load() || !last_progress_ || now - *last_progress_ > 2 * config_.heartbeat_interval) return;
  upload_marker(collect_marker_path(config_.site_id()), now, counters_.collect_attempts, counters_.collect_uploads);
}

bool SiteAgent::recorder_alive(Timestamp now) const {
  std::lock_guard lock(mu_);
  return !halted_.load() && last_progress_ && now - *last_progress_ <= 2 * config_.heartbeat_interval;
}

void SiteAgent::halt_recorder() {
  std::lock_guard lock(mu_);
  halted_.store(true);
  recorder_.flush();
}

void SiteAgent::resume_recorder() { halted_.store(false); }

void SiteAgent::flush() {
  std::lock_guard lock(mu_);
  recorder_.flush();
}

AgentCounters SiteAgent::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

void SiteAgent::hook(ArchiveStage stage, CivilDate day) {
  if (faults_.archive_hook) faults_.archive_hook(stage, day);
}

bool SiteAgent::confirm_upload(const fs::path& local, const std::string& remote) {
  const auto size = fs::file_size(local);
  const auto slash = remote.rfind('/');
  for (const auto& e : client_.list(remote.substr(0, slash))) {
    if (e.path == remote) return e.size == size;
  }
  return false;
}

bool SiteAgent::finish_orphan_archive(const fs::path& archive, CivilDate day) {
  // Raw data is gone, so the archive is the only local copy: upload unless already there.
  const auto remote = inbox_archive_path(config_.site_id(), day);
  try {
    if (!confirm_upload(archive, remote)) {
      if (faults_.suppress_archive_upload.load()) return false;
      client_.put_file(archive, remote);
      if (!confirm_upload(archive, remote)) return false;
    }
  } catch (const TransferError& e) {
    spdlog::warn("agent {}: pending archive {} not uploaded: {}", config_.site_id(), archive.filename().string(),
                 e.what());
    return false;
  }
  fs::remove(archive);
  return true;
}

namespace {

// An archive left by a failed cycle is reused when nothing in the day changed after it.
bool archive_current(const fs::path& archive, const fs::path& dir) {
  std::error_code ec;
  const auto built = fs::last_write_time(archive, ec);
  if (ec) return false;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.last_write_time() > built) return false;
  }
  return true;
}

}  // namespace

bool SiteAgent::archive_day(CivilDate day, Timestamp now) {
  (void)now;
  const auto dir = day_dir(config_.data_dir, day);
  const auto local = config_.resolved_outbox() / archive_name(config_.site_id(), day);
  const auto remote = inbox_archive_path(config_.site_id(), day);
  try {
    if (!archive_current(local, dir)) {
      const auto h = compress_dir(dir, local, config_.compression_level);
      spdlog::info("agent {}: archived {} ({} -> {} bytes, {:.2f}:1)", config_.site_id(), format_day_key(day),
                   h.uncompressed_bytes, h.compressed_bytes, h.ratio());
    }
  } catch (const std::exception& e) {
    spdlog::error("agent {}: compressing {} failed: {}", config_.site_id(), format_day_key(day), e.what());
    return false;
  }
  hook(ArchiveStage::compressed, day);
  if (faults_.suppress_archive_upload.load()) return false;
  try {
    client_.put_file(local, remote);
    hook(ArchiveStage::uploaded, day);
    if (!confirm_upload(local, remote)) {
      spdlog::warn("agent {}: upload of {} not confirmed", config_.site_id(), remote);
      return false;
    }
  } catch (const TransferError& e) {
    spdlog::warn("agent {}: upload of {} failed, keeping raw data: {}", config_.site_id(), remote, e.what());
    return false;
  }
  hook(ArchiveStage::confirmed, day);
  fs::remove_all(dir);
  hook(ArchiveStage::raw_deleted, day);
  fs::remove(local);
  ++counters_.archives_uploaded;
  return true;
}

ArchiveCycleReport SiteAgent::daily_archive_job(Timestamp now) {
  std::lock_guard lock(mu_);
  ArchiveCycleReport report;
  recorder_.close_before(now);
  const auto today = utc_date(now);

  const auto outbox = config_.resolved_outbox();
  std::vector<std::pair<fs::path, CivilDate>> pending;
  for (const auto& e : fs::directory_iterator(outbox)) {
    std::string site;
    CivilDate day;
    if (!e.is_regular_file() || !parse_archive_name(e.path().filename().string(), site, day)) continue;
    if (site != config_.site_id()) continue;
    pending.emplace_back(e.path(), day);
  }
  for (const auto& [path, day] : pending) {
    if (fs::exists(day_dir(config_.data_dir, day))) continue;  // rebuilt from raw below
    (finish_orphan_archive(path, day) ? report.uploaded : report.failed).push_back(day);
  }

  for (const auto day : list_day_dirs(config_.data_dir)) {
    if (!(day < today)) continue;
    if (recorder_.open_minute() && utc_date(*recorder_.open_minute()) == day) continue;
    (archive_day(day, now) ? report.uploaded : report.failed).push_back(day);
  }
  archive_retry_pending_ = !report.ok();
  return report;
}

}  // namespace specmon
