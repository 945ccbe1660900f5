#include "specmon/store.hpp"

#include <sqlite3.h>
#include <sodium.h>

#include <json.hpp>

#include "schema_sql.hpp"
#include "specmon/error.hpp"

namespace specmon {

namespace {

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db) + " [" + sql + "]");
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Stmt& bind(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }
  Stmt& bind(int i, const std::string& v) {
    check(sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind_null(int i) {
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }
  template <typename T>
  Stmt& bind_opt(int i, const std::optional<T>& v) {
    return v ? bind(i, *v) : bind_null(i);
  }

  /// True while rows are available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
  }
  void exec() {
    while (step()) {
    }
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
  double f64(int col) const { return sqlite3_column_double(stmt_, col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::optional<Timestamp> opt_time(int col) const {
    if (is_null(col)) return std::nullopt;
    return from_unix_us(i64(col));
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec_sql(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StoreError("sql failed: " + msg);
  }
}

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec_sql(db_, "BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) {
      try {
        exec_sql(db_, "ROLLBACK");
      } catch (...) {
      }
    }
  }
  void commit() {
    exec_sql(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

std::optional<std::int64_t> opt_us(const std::optional<Timestamp>& t) {
  if (!t) return std::nullopt;
  return to_unix_us(*t);
}

constexpr const char* kUpsertAu =
    "INSERT INTO au_results (site_id, channel_start_hz, channel_stop_hz, hour_start_us, threshold_ref_dbm,"
    " au_percent, occupied_sweeps, total_sweeps, complete) VALUES (?,?,?,?,?,?,?,?,?)"
    " ON CONFLICT (site_id, channel_start_hz, hour_start_us, threshold_ref_dbm) DO UPDATE SET"
    " channel_stop_hz = excluded.channel_stop_hz, au_percent = excluded.au_percent,"
    " occupied_sweeps = excluded.occupied_sweeps, total_sweeps = excluded.total_sweeps, complete = excluded.complete";

void bind_au(Stmt& s, const AURecord& r) {
  s.bind(1, r.site_id)
      .bind(2, r.channel_start_hz)
      .bind(3, r.channel_stop_hz)
      .bind(4, to_unix_us(r.hour_start))
      .bind(5, r.threshold_ref_dbm)
      .bind_opt(6, r.au_percent)
      .bind(7, r.occupied_sweeps)
      .bind(8, r.total_sweeps)
      .bind(9, static_cast<std::int64_t>(r.complete ? 1 : 0));
}

AURecord read_au(const Stmt& s) {
  AURecord r;
  r.site_id = s.text(0);
  r.channel_start_hz = s.i64(1);
  r.channel_stop_hz = s.i64(2);
  r.hour_start = from_unix_us(s.i64(3));
  r.threshold_ref_dbm = s.f64(4);
  if (!s.is_null(5)) r.au_percent = s.f64(5);
  r.occupied_sweeps = s.i64(6);
  r.total_sweeps = s.i64(7);
  r.complete = s.i64(8) != 0;
  return r;
}

constexpr const char* kAuColumns =
    "site_id, channel_start_hz, channel_stop_hz, hour_start_us, threshold_ref_dbm, au_percent, occupied_sweeps,"
    " total_sweeps, complete";

constexpr const char* kAuWhere =
    " FROM au_results WHERE site_id = ? AND threshold_ref_dbm = ? AND hour_start_us >= ? AND hour_start_us < ?"
    " AND channel_start_hz >= ? AND channel_stop_hz <= ?";

void bind_query(Stmt& s, const AuQuery& q) {
  s.bind(1, q.site_id)
      .bind(2, q.threshold_ref_dbm)
      .bind(3, to_unix_us(q.from))
      .bind(4, to_unix_us(q.to))
      .bind(5, q.freq_min)
      .bind(6, q.freq_max);
}

Alert read_alert(const Stmt& s) {
  Alert a;
  a.id = s.i64(0);
  a.site_id = s.text(1);
  a.failure_type = parse_failure_type(s.text(2));
  a.detected_at = from_unix_us(s.i64(3));
  a.last_seen_at = from_unix_us(s.i64(4));
  a.message = s.text(5);
  a.delivered = s.i64(6) != 0;
  a.open = s.i64(7) != 0;
  a.resolved_at = s.opt_time(8);
  a.recovery_delivered = s.i64(9) != 0;
  return a;
}

SiteRecord read_site(const Stmt& s) {
  SiteRecord r;
  r.site_id = s.text(0);
  r.name = s.text(1);
  r.latitude = s.f64(2);
  r.longitude = s.f64(3);
  r.timezone = s.text(4);
  r.channel_width_hz = s.i64(5);
  r.thresholds_dbm = nlohmann::json::parse(s.text(6)).get<std::vector<double>>();
  r.min_coverage = s.f64(7);
  r.commissioned_at = from_unix_us(s.i64(8));
  return r;
}

}  // namespace

struct Store::Db {
  sqlite3* handle = nullptr;
  ~Db() {
    if (handle) sqlite3_close(handle);
  }
};

Store::Store(const std::string& path) : db_(std::make_unique<Db>()) {
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_->handle, flags, nullptr) != SQLITE_OK) {
    throw StoreError("cannot open store " + path + ": " + sqlite3_errmsg(db_->handle));
  }
  sqlite3_busy_timeout(db_->handle, 5000);
  exec_sql(db_->handle, "PRAGMA foreign_keys = ON");
  if (path != ":memory:") exec_sql(db_->handle, "PRAGMA journal_mode = WAL");
  exec_sql(db_->handle, detail::kSchemaSql);
  if (sodium_init() < 0) throw StoreError("libsodium init failed");
}

Store::~Store() = default;

void Store::upsert_site(const SiteRecord& site) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "INSERT INTO sites (site_id, name, latitude, longitude, timezone, channel_width_hz, thresholds_dbm,"
         " min_coverage, commissioned_at_us) VALUES (?,?,?,?,?,?,?,?,?) ON CONFLICT (site_id) DO UPDATE SET"
         " name = excluded.name, latitude = excluded.latitude, longitude = excluded.longitude,"
         " timezone = excluded.timezone, channel_width_hz = excluded.channel_width_hz,"
         " thresholds_dbm = excluded.thresholds_dbm, min_coverage = excluded.min_coverage,"
         " commissioned_at_us = excluded.commissioned_at_us");
  s.bind(1, site.site_id)
      .bind(2, site.name)
      .bind(3, site.latitude)
      .bind(4, site.longitude)
      .bind(5, site.timezone)
      .bind(6, site.channel_width_hz)
      .bind(7, nlohmann::json(site.thresholds_dbm).dump())
      .bind(8, site.min_coverage)
      .bind(9, to_unix_us(site.commissioned_at));
  s.exec();
}

std::optional<SiteRecord> Store::site(const std::string& site_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "SELECT site_id, name, latitude, longitude, timezone, channel_width_hz, thresholds_dbm, min_coverage,"
         " commissioned_at_us FROM sites WHERE site_id = ?");
  s.bind(1, site_id);
  if (!s.step()) return std::nullopt;
  return read_site(s);
}

std::vector<SiteRecord> Store::sites() const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "SELECT site_id, name, latitude, longitude, timezone, channel_width_hz, thresholds_dbm, min_coverage,"
         " commissioned_at_us FROM sites ORDER BY site_id");
  std::vector<SiteRecord> out;
  while (s.step()) out.push_back(read_site(s));
  return out;
}

std::size_t Store::persist_au(std::span<const AURecord> records) {
  std::lock_guard lock(mu_);
  Transaction tx(db_->handle);
  Stmt s(db_->handle, kUpsertAu);
  for (const auto& r : records) {
    bind_au(s, r);
    s.exec();
    s.reset();
  }
  tx.commit();
  return records.size();
}

std::size_t Store::replace_site_range(const std::string& site_id, Timestamp from, Timestamp to,
                                      std::span<const AURecord> records) {
  std::lock_guard lock(mu_);
  Transaction tx(db_->handle);
  {
    Stmt del(db_->handle, "DELETE FROM au_results WHERE site_id = ? AND hour_start_us >= ? AND hour_start_us < ?");
    del.bind(1, site_id).bind(2, to_unix_us(from)).bind(3, to_unix_us(to));
    del.exec();
  }
  Stmt s(db_->handle, kUpsertAu);
  for (const auto& r : records) {
    if (r.site_id != site_id || r.hour_start < from || r.hour_start >= to) {
      throw StoreError("replace_site_range: record outside the replaced range");
    }
    bind_au(s, r);
    s.exec();
    s.reset();
  }
  tx.commit();
  return records.size();
}

std::vector<AURecord> Store::query_au(const AuQuery& q) const {
  std::lock_guard lock(mu_);
  const std::string sql = std::string("SELECT ") + kAuColumns + kAuWhere +
                          " ORDER BY hour_start_us, channel_start_hz LIMIT ? OFFSET ?";
  Stmt s(db_->handle, sql.c_str());
  bind_query(s, q);
  const auto limit = q.limit > static_cast<std::size_t>(std::numeric_limits<std::int64_t>::max())
                         ? std::int64_t{-1}
                         : static_cast<std::int64_t>(q.limit);
  s.bind(7, limit).bind(8, static_cast<std::int64_t>(q.offset));
  std::vector<AURecord> out;
  while (s.step()) out.push_back(read_au(s));
  return out;
}

std::size_t Store::count_au(const AuQuery& q) const {
  std::lock_guard lock(mu_);
  const std::string sql = std::string("SELECT COUNT(*)") + kAuWhere;
  Stmt s(db_->handle, sql.c_str());
  bind_query(s, q);
  s.step();
  return static_cast<std::size_t>(s.i64(0));
}

std::size_t Store::count_au_rows(const std::string& site_id) const {
  std::lock_guard lock(mu_);
  if (site_id.empty()) {
    Stmt s(db_->handle, "SELECT COUNT(*) FROM au_results");
    s.step();
    return static_cast<std::size_t>(s.i64(0));
  }
  Stmt s(db_->handle, "SELECT COUNT(*) FROM au_results WHERE site_id = ?");
  s.bind(1, site_id);
  s.step();
  return static_cast<std::size_t>(s.i64(0));
}

std::vector<double> Store::thresholds_present(const std::string& site_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle, "SELECT DISTINCT threshold_ref_dbm FROM au_results WHERE site_id = ? ORDER BY 1");
  s.bind(1, site_id);
  std::vector<double> out;
  while (s.step()) out.push_back(s.f64(0));
  return out;
}

std::string Store::au_digest() const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         (std::string("SELECT ") + kAuColumns +
          " FROM au_results ORDER BY site_id, channel_start_hz, hour_start_us, threshold_ref_dbm")
             .c_str());
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, crypto_generichash_BYTES);
  while (s.step()) {
    std::string row;
    for (int c = 0; c < 9; ++c) {
      row += s.text(c);
      row += '\x1f';
    }
    row += '\x1e';
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(row.data()), row.size());
  }
  unsigned char out[crypto_generichash_BYTES];
  crypto_generichash_final(&st, out, sizeof out);
  char hex[crypto_generichash_BYTES * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, out, sizeof out);
  return hex;
}

bool Store::create_user(const UserRow& user) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "INSERT INTO users (username, password_digest, created_at_us) VALUES (?,?,?) ON CONFLICT DO NOTHING");
  s.bind(1, user.username).bind(2, user.password_digest).bind(3, to_unix_us(user.created_at));
  s.exec();
  return sqlite3_changes(db_->handle) == 1;
}

std::optional<UserRow> Store::user(const std::string& username) const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle, "SELECT username, password_digest, created_at_us FROM users WHERE username = ?");
  s.bind(1, username);
  if (!s.step()) return std::nullopt;
  return UserRow{s.text(0), s.text(1), from_unix_us(s.i64(2))};
}

void Store::create_session(const SessionRow& session) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle, "INSERT INTO sessions (token, username, expires_at_us) VALUES (?,?,?)");
  s.bind(1, session.token).bind(2, session.username).bind(3, to_unix_us(session.expires_at));
  s.exec();
}

std::optional<SessionRow> Store::session(const std::string& token) const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle, "SELECT token, username, expires_at_us FROM sessions WHERE token = ?");
  s.bind(1, token);
  if (!s.step()) return std::nullopt;
  return SessionRow{s.text(0), s.text(1), from_unix_us(s.i64(2))};
}

void Store::delete_session(const std::string& token) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle, "DELETE FROM sessions WHERE token = ?");
  s.bind(1, token);
  s.exec();
}

void Store::save_status(const SiteStatus& st) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "INSERT INTO heartbeats (site_id, reachability, reach_last_seen_us, collection, collect_last_seen_us, archive,"
         " latest_archive_mtime_us, updated_at_us) VALUES (?,?,?,?,?,?,?,?) ON CONFLICT (site_id) DO UPDATE SET"
         " reachability = excluded.reachability, reach_last_seen_us = excluded.reach_last_seen_us,"
         " collection = excluded.collection, collect_last_seen_us = excluded.collect_last_seen_us,"
         " archive = excluded.archive, latest_archive_mtime_us = excluded.latest_archive_mtime_us,"
         " updated_at_us = excluded.updated_at_us");
  s.bind(1, st.site_id)
      .bind(2, std::string(to_string(st.reachability)))
      .bind_opt(3, opt_us(st.reach_last_seen))
      .bind(4, std::string(to_string(st.collection)))
      .bind_opt(5, opt_us(st.collect_last_seen))
      .bind(6, std::string(to_string(st.archive)))
      .bind_opt(7, opt_us(st.latest_archive_mtime))
      .bind(8, to_unix_us(st.updated_at));
  s.exec();
}

std::vector<SiteStatus> Store::statuses() const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "SELECT site_id, reachability, reach_last_seen_us, collection, collect_last_seen_us, archive,"
         " latest_archive_mtime_us, updated_at_us FROM heartbeats ORDER BY site_id");
  std::vector<SiteStatus> out;
  while (s.step()) {
    SiteStatus st;
    st.site_id = s.text(0);
    st.reachability = parse_health(s.text(1));
    st.reach_last_seen = s.opt_time(2);
    st.collection = parse_health(s.text(3));
    st.collect_last_seen = s.opt_time(4);
    st.archive = parse_health(s.text(5));
    st.latest_archive_mtime = s.opt_time(6);
    st.updated_at = from_unix_us(s.i64(7));
    out.push_back(std::move(st));
  }
  return out;
}

std::int64_t Store::insert_alert(const Alert& a) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "INSERT INTO alerts (site_id, failure_type, detected_at_us, last_seen_at_us, message, delivered, is_open,"
         " resolved_at_us, recovery_delivered) VALUES (?,?,?,?,?,?,?,?,?)");
  s.bind(1, a.site_id)
      .bind(2, std::string(to_string(a.failure_type)))
      .bind(3, to_unix_us(a.detected_at))
      .bind(4, to_unix_us(a.last_seen_at))
      .bind(5, a.message)
      .bind(6, static_cast<std::int64_t>(a.delivered))
      .bind(7, static_cast<std::int64_t>(a.open))
      .bind_opt(8, opt_us(a.resolved_at))
      .bind(9, static_cast<std::int64_t>(a.recovery_delivered));
  s.exec();
  return sqlite3_last_insert_rowid(db_->handle);
}

void Store::update_alert(const Alert& a) {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         "UPDATE alerts SET last_seen_at_us = ?, message = ?, delivered = ?, is_open = ?, resolved_at_us = ?,"
         " recovery_delivered = ? WHERE alert_id = ?");
  s.bind(1, to_unix_us(a.last_seen_at))
      .bind(2, a.message)
      .bind(3, static_cast<std::int64_t>(a.delivered))
      .bind(4, static_cast<std::int64_t>(a.open))
      .bind_opt(5, opt_us(a.resolved_at))
      .bind(6, static_cast<std::int64_t>(a.recovery_delivered))
      .bind(7, a.id);
  s.exec();
}

std::vector<Alert> Store::alerts(bool open_only) const {
  std::lock_guard lock(mu_);
  Stmt s(db_->handle,
         open_only ? "SELECT alert_id, site_id, failure_type, detected_at_us, last_seen_at_us, message, delivered,"
                     " is_open, resolved_at_us, recovery_delivered FROM alerts WHERE is_open = 1 ORDER BY alert_id"
                   : "SELECT alert_id, site_id, failure_type, detected_at_us, last_seen_at_us, message, delivered,"
                     " is_open, resolved_at_us, recovery_delivered FROM alerts ORDER BY alert_id");
  std::vector<Alert> out;
  while (s.step()) out.push_back(read_alert(s));
  return out;
}

}  // namespace specmon
