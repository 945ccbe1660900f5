#include "specmon/monitor.hpp"

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "specmon/agent.hpp"
#include "specmon/archive.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"

namespace specmon {

namespace fs = std::filesystem;

void validate_monitor_config(const MonitorConfig& c) {
  if (c.check_interval <= Micros::zero()) throw InvalidArgument("check_interval: must be > 0");
  if (c.heartbeat_window <= Micros::zero()) throw InvalidArgument("heartbeat_window: must be > 0");
  if (c.archive_max_age <= Micros::zero()) throw InvalidArgument("archive_max_age: must be > 0");
  if (c.archive_grace < Micros::zero()) throw InvalidArgument("archive_grace: must be >= 0");
  if (c.notify_attempts < 1) throw InvalidArgument("notify_attempts: must be >= 1");
  if (!c.webhook_url.empty() && !c.webhook_url.starts_with("http://")) {
    throw InvalidArgument("webhook_url: only http:// URLs are supported");
  }
}

std::string webhook_payload(const Alert& a, bool recovery) {
  nlohmann::ordered_json j;
  j["site_id"] = a.site_id;
  j["failure_type"] = std::string(to_string(a.failure_type));
  j["detected_at"] = format_rfc3339(a.detected_at);
  j["message"] = recovery ? "resolved at " + format_rfc3339(a.resolved_at.value_or(a.last_seen_at)) + ": " + a.message
                          : a.message;
  return j.dump();
}

Monitor::Monitor(MonitorConfig config, Store& store, TransferClient& inbox, Clock& clock, WebhookClient* webhook)
    : config_(std::move(config)), store_(store), inbox_(inbox), clock_(clock), webhook_(webhook) {
  validate_monitor_config(config_);
  for (const auto& a : store_.alerts(false)) {
    alerts_[a.id] = a;
    if (a.open) open_[{a.site_id, a.failure_type}] = a.id;
  }
  for (const auto& s : store_.statuses()) status_[s.site_id] = s;
  thread_ = std::thread([this] { worker(); });
}

Monitor::~Monitor() {
  {
    std::lock_guard lock(q_mu_);
    stop_ = true;
  }
  q_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

CheckResult Monitor::check_reachability(const std::string& site_id, Timestamp now) {
  CheckResult r;
  std::lock_guard lock(inbox_mu_);
  try {
    const auto t = inbox_.mtime(reach_marker_path(site_id));
    r.last_seen = t;
    if (now - t > config_.heartbeat_window) {
      r.health = Health::failed;
      r.message = "no reachability heartbeat since " + format_rfc3339(t);
    } else {
      r.health = Health::ok;
    }
  } catch (const TransferError& e) {
    if (e.phase() == TransferPhase::read) {
      r.health = Health::failed;
      r.message = "reachability heartbeat never seen";
    } else {
      r.message = std::string("endpoint error: ") + e.what();
    }
  }
  return r;
}

CheckResult Monitor::check_collection(const std::string& site_id, Timestamp now) {
  CheckResult r;
  std::lock_guard lock(inbox_mu_);
  try {
    const auto t = inbox_.mtime(collect_marker_path(site_id));
    r.last_seen = t;
    if (now - t > config_.heartbeat_window) {
      r.health = Health::failed;
      r.message = "data collection stopped; last collection heartbeat " + format_rfc3339(t);
    } else {
      r.health = Health::ok;
    }
  } catch (const TransferError& e) {
    if (e.phase() == TransferPhase::read) {
      r.health = Health::failed;
      r.message = "collection heartbeat never seen";
    } else {
      r.message = std::string("endpoint error: ") + e.what();
    }
  }
  return r;
}

CheckResult Monitor::check_archive_freshness(const SiteRecord& site, Timestamp now) {
  CheckResult r;
  std::optional<Timestamp> newest;
  auto consider = [&](const std::string& name, Timestamp t) {
    std::string sid;
    CivilDate day;
    if (!parse_archive_name(name, sid, day) || sid != site.site_id) return;
    if (!newest || t > *newest) newest = t;
  };
  try {
    std::lock_guard lock(inbox_mu_);
    for (const auto& e : inbox_.list(site.site_id)) {
      consider(fs::path(e.path).filename().string(), e.mtime);
    }
  } catch (const TransferError& e) {
    r.message = std::string("inbox listing failed: ") + e.what();
    return r;
  }
  if (!config_.long_term_root.empty()) {
    std::error_code ec;
    const auto dir = config_.long_term_root / site.site_id;
    if (fs::is_directory(dir, ec)) {
      try {
        for (const auto& e : fs::directory_iterator(dir)) {
          if (!e.is_regular_file() || is_temp_name(e.path())) continue;
          consider(e.path().filename().string(), from_file_time(e.last_write_time()));
        }
      } catch (const fs::filesystem_error& e) {
        r.message = std::string("long-term listing failed: ") + e.what();
        return r;
      }
    }
  }
  r.last_seen = newest;
  if (!newest) {
    if (now - site.commissioned_at > config_.archive_grace) {
      r.health = Health::stale;
      r.message = "no archive ever received";
    } else {
      r.health = Health::ok;
    }
    return r;
  }
  if (now - *newest > config_.archive_max_age) {
    r.health = Health::stale;
    r.message = "newest archive received " + format_rfc3339(*newest);
  } else {
    r.health = Health::ok;
  }
  return r;
}

void Monitor::open_or_refresh(const std::string& site_id, FailureType type, const std::string& message,
                              Timestamp now) {
  std::int64_t to_notify = 0;
  {
    std::lock_guard lock(mu_);
    const auto key = std::make_pair(site_id, type);
    if (auto it = open_.find(key); it != open_.end()) {
      auto& a = alerts_.at(it->second);
      a.last_seen_at = now;
      store_.update_alert(a);
      return;
    }
    Alert a;
    a.site_id = site_id;
    a.failure_type = type;
    a.detected_at = now;
    a.last_seen_at = now;
    a.message = message;
    a.id = store_.insert_alert(a);
    alerts_[a.id] = a;
    open_[key] = a.id;
    to_notify = a.id;
    spdlog::warn("monitor {}: {} - {}", site_id, to_string(type), message);
  }
  enqueue(to_notify, false);
}

void Monitor::resolve(const std::string& site_id, FailureType type, Timestamp now) {
  std::int64_t id = 0;
  {
    std::lock_guard lock(mu_);
    auto it = open_.find({site_id, type});
    if (it == open_.end()) return;
    id = it->second;
    auto& a = alerts_.at(id);
    a.open = false;
    a.resolved_at = now;
    store_.update_alert(a);
    open_.erase(it);
    spdlog::info("monitor {}: {} resolved", site_id, to_string(type));
  }
  enqueue(id, true);
}

void Monitor::detect(const std::string& site_id, FailureType type, const CheckResult& r, Timestamp now) {
  if (r.health == Health::failed || r.health == Health::stale) {
    open_or_refresh(site_id, type, r.message, now);
  } else if (r.health == Health::ok) {
    if (type == FailureType::archive_missing) {
      // An alert raised by the collector stays open until a newer archive shows up.
      std::lock_guard lock(mu_);
      auto it = open_.find({site_id, type});
      if (it != open_.end() && r.last_seen && *r.last_seen <= alerts_.at(it->second).detected_at) return;
    }
    resolve(site_id, type, now);
  }
}

SiteStatus Monitor::check_site(const SiteRecord& site, Timestamp now) {
  SiteStatus st;
  st.site_id = site.site_id;
  st.updated_at = now;

  const auto reach = check_reachability(site.site_id, now);
  st.reachability = reach.health;
  st.reach_last_seen = reach.last_seen;
  detect(site.site_id, FailureType::unreachable, reach, now);

  CheckResult collect;
  bool unreachable_open;
  {
    std::lock_guard lock(mu_);
    unreachable_open = open_.count({site.site_id, FailureType::unreachable}) > 0;
  }
  if (unreachable_open || reach.health != Health::ok) {
    // Without connectivity the collection state cannot be known.
    collect.message = "suppressed while unreachable";
    std::lock_guard lock(mu_);
    if (auto it = status_.find(site.site_id); it != status_.end()) collect.last_seen = it->second.collect_last_seen;
  } else {
    collect = check_collection(site.site_id, now);
    detect(site.site_id, FailureType::collection_stopped, collect, now);
  }
  st.collection = collect.health;
  st.collect_last_seen = collect.last_seen;

  const auto archive = check_archive_freshness(site, now);
  st.archive = archive.health;
  st.latest_archive_mtime = archive.last_seen;
  detect(site.site_id, FailureType::archive_missing, archive, now);

  {
    std::lock_guard lock(mu_);
    status_[site.site_id] = st;
  }
  store_.save_status(st);
  return st;
}

void Monitor::check_all(Timestamp now) {
  for (const auto& site : store_.sites()) check_site(site, now);
  std::vector<std::pair<std::int64_t, bool>> retry;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, a] : alerts_) {
      if (!a.delivered) retry.emplace_back(id, false);
      if (!a.open && !a.recovery_delivered) retry.emplace_back(id, true);
    }
  }
  for (const auto& [id, recovery] : retry) enqueue(id, recovery);
}

void Monitor::raise(const std::string& site_id, FailureType type, const std::string& message, Timestamp now) {
  open_or_refresh(site_id, type, message, now);
}

std::vector<SiteStatus> Monitor::status_snapshot() const {
  const auto sites = store_.sites();
  std::lock_guard lock(mu_);
  std::vector<SiteStatus> out;
  for (const auto& s : sites) {
    if (auto it = status_.find(s.site_id); it != status_.end()) {
      out.push_back(it->second);
    } else {
      SiteStatus st;
      st.site_id = s.site_id;
      out.push_back(st);
    }
  }
  return out;
}

std::vector<Alert> Monitor::alert_log() const {
  std::lock_guard lock(mu_);
  std::vector<Alert> out;
  for (const auto& [id, a] : alerts_) out.push_back(a);
  return out;
}

std::vector<Alert> Monitor::open_alerts() const {
  std::lock_guard lock(mu_);
  std::vector<Alert> out;
  for (const auto& [key, id] : open_) out.push_back(alerts_.at(id));
  std::sort(out.begin(), out.end(), [](const Alert& a, const Alert& b) { return a.id < b.id; });
  return out;
}

void Monitor::enqueue(std::int64_t alert_id, bool recovery) {
  if (!webhook_ || config_.webhook_url.empty()) return;
  {
    std::lock_guard lock(q_mu_);
    if (!in_flight_.insert({alert_id, recovery}).second) return;
    queue_.push_back(Job{alert_id, recovery});
  }
  q_cv_.notify_all();
}

bool Monitor::deliver(const Alert& alert, bool recovery) {
  const auto body = webhook_payload(alert, recovery);
  for (int attempt = 0; attempt < config_.notify_attempts; ++attempt) {
    if (attempt > 0) clock_.sleep_for(config_.notify_backoff * (1 << (attempt - 1)));
    int status = -1;
    try {
      status = webhook_->post(config_.webhook_url, body);
    } catch (const std::exception& e) {
      spdlog::warn("monitor: webhook post failed: {}", e.what());
    }
    sent_.fetch_add(1);
    if (status >= 200 && status < 300) return true;
  }
  return false;
}

void Monitor::worker() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(q_mu_);
      q_cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = queue_.front();
      queue_.pop_front();
      busy_ = true;
    }
    Alert snapshot;
    bool skip = false;
    {
      std::lock_guard lock(mu_);
      snapshot = alerts_.at(job.alert_id);
      skip = job.recovery ? snapshot.recovery_delivered : snapshot.delivered;
    }
    const bool ok = skip || deliver(snapshot, job.recovery);
    {
      std::lock_guard lock(mu_);
      auto& a = alerts_.at(job.alert_id);
      if (ok) {
        (job.recovery ? a.recovery_delivered : a.delivered) = true;
        store_.update_alert(a);
      } else {
        spdlog::warn("monitor: notification for alert {} not delivered; retrying next cycle", job.alert_id);
      }
    }
    {
      std::lock_guard lock(q_mu_);
      in_flight_.erase({job.alert_id, job.recovery});
      busy_ = false;
    }
    q_cv_.notify_all();
  }
}

void Monitor::flush_notifications() {
  std::unique_lock lock(q_mu_);
  q_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

Scheduler::TaskId Monitor::attach(Scheduler& s) {
  return s.every(config_.check_interval, s.now() + config_.check_interval, [this](Timestamp now) {
    try {
      check_all(now);
    } catch (const std::exception& e) {
      spdlog::error("monitor: check cycle failed: {}", e.what());
    }
  });
}

}  // namespace specmon
