#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "specmon/time.hpp"

namespace specmon {

enum class FailureType { unreachable, collection_stopped, archive_missing };
std::string_view to_string(FailureType type);
FailureType parse_failure_type(std::string_view name);

/// Per-detector health. `stale` is used by the archive detector, `failed` by the heartbeat
/// detectors; `unknown` means the check itself could not run (or was suppressed).
enum class Health { ok, failed, stale, unknown };
std::string_view to_string(Health health);
Health parse_health(std::string_view name);

struct SiteStatus {
  std::string site_id;
  Health reachability = Health::unknown;
  std::optional<Timestamp> reach_last_seen;
  Health collection = Health::unknown;
  std::optional<Timestamp> collect_last_seen;
  Health archive = Health::unknown;
  std::optional<Timestamp> latest_archive_mtime;
  Timestamp updated_at{};

  friend bool operator==(const SiteStatus&, const SiteStatus&) = default;
};

/// "ok" when every detector is ok, "unknown" before the first check, else "degraded".
std::string summarize(const SiteStatus& status);

struct Alert {
  std::int64_t id = 0;
  std::string site_id;
  FailureType failure_type = FailureType::unreachable;
  Timestamp detected_at{};
  /// Refreshed on every re-detection while the alert stays open.
  Timestamp last_seen_at{};
  std::string message;
  bool delivered = false;
  bool open = true;
  std::optional<Timestamp> resolved_at;
  bool recovery_delivered = false;

  friend bool operator==(const Alert&, const Alert&) = default;
};

}  // namespace specmon
