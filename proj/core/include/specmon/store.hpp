#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specmon/model.hpp"
#include "specmon/ops.hpp"

namespace specmon {

/// Registry entry for one remote location plus the analysis inputs for it.
struct SiteRecord {
  std::string site_id;
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string timezone = "UTC";
  Hz channel_width_hz = kDefaultChannelWidth;
  /// Analysis thresholds in dBm per 20 MHz.
  std::vector<double> thresholds_dbm{kDefaultReferencePower};
  double min_coverage = kDefaultMinCoverage;
  Timestamp commissioned_at{};

  friend bool operator==(const SiteRecord&, const SiteRecord&) = default;
};

struct AuQuery {
  std::string site_id;
  double threshold_ref_dbm = kDefaultReferencePower;
  /// hour_start in [from, to)
  Timestamp from{};
  Timestamp to{Micros{std::numeric_limits<std::int64_t>::max()}};
  /// channel fully inside [freq_min, freq_max]
  Hz freq_min = 0;
  Hz freq_max = std::numeric_limits<Hz>::max();
  std::size_t limit = std::numeric_limits<std::size_t>::max();
  std::size_t offset = 0;
};

struct UserRow {
  std::string username;
  std::string password_digest;
  Timestamp created_at{};
};

struct SessionRow {
  std::string token;
  std::string username;
  Timestamp expires_at{};
};

/// SQLite-backed relational store (schema in sql/schema.sql). All methods are
/// thread-safe; multi-row writes are single transactions.
class Store {
 public:
  /// ":memory:" opens a private in-memory database.
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // sites
  void upsert_site(const SiteRecord& site);
  std::optional<SiteRecord> site(const std::string& site_id) const;
  std::vector<SiteRecord> sites() const;

  // AU results
  /// Upsert keyed by (site, channel_start, hour_start, threshold_ref). Throws StoreError
  /// and rolls back everything on a constraint violation.
  std::size_t persist_au(std::span<const AURecord> records);
  /// Replaces the rows of one site whose hour_start lies in [from, to) with `records`.
  std::size_t replace_site_range(const std::string& site_id, Timestamp from, Timestamp to,
                                 std::span<const AURecord> records);
  /// Ordered by (hour_start, channel_start).
  std::vector<AURecord> query_au(const AuQuery& query) const;
  std::size_t count_au(const AuQuery& query) const;
  std::size_t count_au_rows(const std::string& site_id = "") const;
  std::vector<double> thresholds_present(const std::string& site_id) const;
  /// Hash over the full au_results row set.
  std::string au_digest() const;

  // users / sessions
  bool create_user(const UserRow& user);
  std::optional<UserRow> user(const std::string& username) const;
  void create_session(const SessionRow& session);
  std::optional<SessionRow> session(const std::string& token) const;
  void delete_session(const std::string& token);

  // ops
  void save_status(const SiteStatus& status);
  std::vector<SiteStatus> statuses() const;
  std::int64_t insert_alert(const Alert& alert);
  void update_alert(const Alert& alert);
  std::vector<Alert> alerts(bool open_only = false) const;

 private:
  struct Db;
  std::unique_ptr<Db> db_;
  mutable std::mutex mu_;
};

}  // namespace specmon
