#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "specmon/clock.hpp"
#include "specmon/ops.hpp"
#include "specmon/store.hpp"
#include "specmon/transfer.hpp"

namespace specmon {

struct MonitorConfig {
  Micros check_interval = std::chrono::seconds{300};
  Micros heartbeat_window = std::chrono::seconds{900};
  /// Archive is stale when the newest one is strictly older than this.
  Micros archive_max_age = kDay;
  /// A site that never delivered an archive is not flagged until this long after commissioning.
  Micros archive_grace = 2 * kDay;
  std::filesystem::path long_term_root;
  /// Empty disables delivery (alerts are still recorded).
  std::string webhook_url;
  int notify_attempts = 3;
  Micros notify_backoff = std::chrono::seconds{1};
};

void validate_monitor_config(const MonitorConfig& config);

/// Minimal HTTP POST used for chat webhooks.
class WebhookClient {
 public:
  virtual ~WebhookClient() = default;
  /// HTTP status, or a negative value when no response was received.
  virtual int post(const std::string& url, const std::string& json_body) = 0;
};

/// httplib-backed client (http:// only).
class HttpWebhookClient final : public WebhookClient {
 public:
  explicit HttpWebhookClient(Micros timeout = std::chrono::seconds{5}) : timeout_(timeout) {}
  int post(const std::string& url, const std::string& json_body) override;

 private:
  Micros timeout_;
};

/// {site_id, failure_type, detected_at, message}
std::string webhook_payload(const Alert& alert, bool recovery);

/// One detector result.
struct CheckResult {
  Health health = Health::unknown;
  std::optional<Timestamp> last_seen;
  std::string message;
};

/// Central watchdog over heartbeat markers and archive freshness.
class Monitor {
 public:
  /// `inbox` lists the central endpoint (markers and <site>/ archive folders).
  Monitor(MonitorConfig config, Store& store, TransferClient& inbox, Clock& clock, WebhookClient* webhook = nullptr);
  ~Monitor();
  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;

  const MonitorConfig& config() const { return config_; }

  CheckResult check_reachability(const std::string& site_id, Timestamp now);
  CheckResult check_collection(const std::string& site_id, Timestamp now);
  CheckResult check_archive_freshness(const SiteRecord& site, Timestamp now);

  /// Runs the three detectors for one site and applies the alert rules.
  SiteStatus check_site(const SiteRecord& site, Timestamp now);
  /// Every registered site, then re-queues undelivered notifications.
  void check_all(Timestamp now);

  /// Opens (or refreshes) an alert raised outside the detectors, e.g. by the collector.
  void raise(const std::string& site_id, FailureType type, const std::string& message, Timestamp now);

  /// Every registered site, in site_id order.
  std::vector<SiteStatus> status_snapshot() const;
  /// Every alert ever raised, by id.
  std::vector<Alert> alert_log() const;
  std::vector<Alert> open_alerts() const;
  std::uint64_t notifications_sent() const { return sent_.load(); }

  /// Blocks until the delivery queue drains.
  void flush_notifications();

  Scheduler::TaskId attach(Scheduler& scheduler);

 private:
  struct Job {
    std::int64_t alert_id;
    bool recovery;
  };
  void detect(const std::string& site_id, FailureType type, const CheckResult& r, Timestamp now);
  void open_or_refresh(const std::string& site_id, FailureType type, const std::string& message, Timestamp now);
  void resolve(const std::string& site_id, FailureType type, Timestamp now);
  void enqueue(std::int64_t alert_id, bool recovery);
  void worker();
  bool deliver(const Alert& alert, bool recovery);

  MonitorConfig config_;
  Store& store_;
  TransferClient& inbox_;
  Clock& clock_;
  WebhookClient* webhook_;

  mutable std::mutex mu_;
  std::mutex inbox_mu_;
  std::map<std::string, SiteStatus> status_;
  std::map<std::int64_t, Alert> alerts_;
  std::map<std::pair<std::string, FailureType>, std::int64_t> open_;

  std::mutex q_mu_;
  std::condition_variable q_cv_;
  std::deque<Job> queue_;
  std::set<std::pair<std::int64_t, bool>> in_flight_;
  bool busy_ = false;
  bool stop_ = false;
  std::atomic<std::uint64_t> sent_{0};
  std::thread thread_;
};

}  // namespace specmon
