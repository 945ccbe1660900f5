#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "specmon/clock.hpp"
#include "specmon/model.hpp"
#include "specmon/sim.hpp"
#include "specmon/sweep_io.hpp"
#include "specmon/transfer.hpp"

namespace specmon {

inline constexpr Micros kDefaultHeartbeatInterval = std::chrono::seconds{300};

struct AgentConfig {
  /// site_id, span, rbw, sweep time, coordinates, gate threshold and timezone.
  SiteParams params;
  std::filesystem::path data_dir;
  /// Local archives waiting for upload; defaults to <data_dir>/../outbox-<site_id>.
  std::filesystem::path outbox_dir;
  TransferEndpoint endpoint;
  Micros heartbeat_interval = kDefaultHeartbeatInterval;
  /// Local hour of the daily archive job.
  int archive_hour = 1;
  /// Retry cadence after a failed archive cycle.
  Micros archive_retry_interval = kHour;
  std::optional<CalibrationTable> calibration;
  int write_retries = 3;
  Micros write_backoff = std::chrono::milliseconds{200};
  int compression_level = 9;

  const std::string& site_id() const { return params.site_id; }
  std::filesystem::path resolved_outbox() const;
};

/// Throws InvalidArgument naming the bad field.
void validate_agent_config(const AgentConfig& config);

/// Remote paths on the central endpoint.
std::string reach_marker_path(const std::string& site_id);
std::string collect_marker_path(const std::string& site_id);
std::string inbox_archive_path(const std::string& site_id, CivilDate day);

/// Points in the daily job where an injected crash may be raised (hook throws).
enum class ArchiveStage { compressed, uploaded, confirmed, raw_deleted };

/// Raised by fault hooks to stop the job at a stage, as if the process died there.
struct SimulatedCrash : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AgentFaults {
  /// Every minute-file write fails while set.
  std::atomic<bool> disk_full{false};
  /// The archive job builds archives but never uploads them.
  std::atomic<bool> suppress_archive_upload{false};
  std::function<void(ArchiveStage, CivilDate)> archive_hook;
};

struct ArchiveCycleReport {
  std::vector<CivilDate> uploaded;
  std::vector<CivilDate> failed;
  bool ok() const { return failed.empty(); }
};

struct AgentCounters {
  std::uint64_t sweeps_seen = 0;
  std::uint64_t sweeps_stored = 0;
  std::uint64_t write_failures = 0;
  std::uint64_t reach_attempts = 0;
  std::uint64_t reach_uploads = 0;
  std::uint64_t collect_attempts = 0;
  std::uint64_t collect_uploads = 0;
  std::uint64_t archives_uploaded = 0;
};

/// Gate-filtered minute-partitioned recorder. Not thread-safe by itself; SiteAgent
/// serializes access.
class Recorder {
 public:
  explicit Recorder(const AgentConfig& config);
  ~Recorder();
  Recorder(const Recorder&) = delete;
  Recorder& operator=(const Recorder&) = delete;

  /// Counts the sweep in its minute manifest and stores it if any bin is above the gate.
  /// Throws IoError when a write fails.
  void record(const Sweep& sweep);
  /// Closes the open minute when it lies entirely before `t`.
  void close_before(Timestamp t);
  /// Closes the open minute (writes its manifest).
  void flush();

  std::optional<Timestamp> open_minute() const { return minute_; }
  std::uint64_t stored() const { return stored_total_; }

  std::function<void()> before_write;

 private:
  void open(Timestamp minute);
  void close_minute();

  const AgentConfig& config_;
  std::optional<Timestamp> minute_;
  std::optional<Timestamp> params_hour_;
  MinuteFileWriter writer_;
  MinuteManifest manifest_;
  std::uint64_t stored_total_ = 0;
};

/// The remote-location daemon: recording loop, heartbeats, daily archive job.
class SiteAgent {
 public:
  SiteAgent(AgentConfig config, SweepSource& source, TransferClient& client, Clock& clock);
  ~SiteAgent();

  const AgentConfig& config() const { return config_; }
  AgentFaults& faults() { return faults_; }

  /// Registers the recording loop, both heartbeats and the daily job. Starts now.
  void attach(Scheduler& scheduler);
  void detach(Scheduler& scheduler);

  /// One scheduled recording tick: pull a sweep stamped `now` and record it.
  void record_tick(Timestamp now);
  void emit_reachability_heartbeat(Timestamp now);
  void emit_collection_heartbeat(Timestamp now);
  /// Archives, uploads and deletes every fully elapsed UTC day.
  ArchiveCycleReport daily_archive_job(Timestamp now);

  /// Stops recording as if the collection process died; heartbeats keep running.
  void halt_recorder();
  void resume_recorder();
  bool recorder_halted() const { return halted_.load(); }
  /// Progress within the last two heartbeat intervals.
  bool recorder_alive(Timestamp now) const;
  /// Closes the open minute; used on shutdown.
  void flush();

  AgentCounters counters() const;

 private:
  bool archive_day(CivilDate day, Timestamp now);
  bool finish_orphan_archive(const std::filesystem::path& archive, CivilDate day);
  bool confirm_upload(const std::filesystem::path& local, const std::string& remote);
  void upload_marker(const std::string& remote, Timestamp now, std::uint64_t& attempts, std::uint64_t& uploads);
  void hook(ArchiveStage stage, CivilDate day);

  AgentConfig config_;
  SweepSource& source_;
  TransferClient& client_;
  Clock& clock_;
  AgentFaults faults_;

  mutable std::mutex mu_;
  Recorder recorder_;
  std::atomic<bool> halted_{false};
  std::optional<Timestamp> last_progress_;
  bool archive_retry_pending_ = false;
  AgentCounters counters_;
  std::vector<Scheduler::TaskId> tasks_;
};

}  // namespace specmon
