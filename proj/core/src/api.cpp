#include "specmon/api.hpp"

#include <sodium.h>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "specmon/error.hpp"

namespace specmon {

using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) { return ApiResponse{status, body.dump(), "application/json"}; }

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, json{{"error", message}});
}

ApiResponse validation_error(int status, const std::vector<FieldError>& errors) {
  json fields = json::array();
  for (const auto& e : errors) fields.push_back({{"field", e.field}, {"message", e.message}});
  return json_response(status, json{{"error", "invalid filter"}, {"fields", fields}});
}

std::optional<std::string> header(const ApiRequest& r, std::string_view name) {
  for (const auto& [k, v] : r.headers) {
    if (k.size() == name.size() &&
        std::equal(k.begin(), k.end(), name.begin(), [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return v;
    }
  }
  return std::nullopt;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

json au_to_json(const AURecord& r) {
  return json{{"site_id", r.site_id},
              {"channel_start_hz", r.channel_start_hz},
              {"channel_stop_hz", r.channel_stop_hz},
              {"hour_start", format_rfc3339(r.hour_start)},
              {"hour_start_us", to_unix_us(r.hour_start)},
              {"au_percent", r.au_percent ? json(*r.au_percent) : json(nullptr)},
              {"occupied_sweeps", r.occupied_sweeps},
              {"total_sweeps", r.total_sweeps},
              {"threshold_ref_dbm", r.threshold_ref_dbm},
              {"complete", r.complete}};
}

json opt_time(const std::optional<Timestamp>& t) { return t ? json(format_rfc3339(*t)) : json(nullptr); }

json status_to_json(const SiteStatus& s) {
  return json{{"site_id", s.site_id},
              {"summary", summarize(s)},
              {"reachability", std::string(to_string(s.reachability))},
              {"reach_last_seen", opt_time(s.reach_last_seen)},
              {"collection", std::string(to_string(s.collection))},
              {"collect_last_seen", opt_time(s.collect_last_seen)},
              {"archive", std::string(to_string(s.archive))},
              {"latest_archive_mtime", opt_time(s.latest_archive_mtime)},
              {"updated_at", format_rfc3339(s.updated_at)}};
}

json alert_to_json(const Alert& a) {
  return json{{"id", a.id},
              {"site_id", a.site_id},
              {"failure_type", std::string(to_string(a.failure_type))},
              {"detected_at", format_rfc3339(a.detected_at)},
              {"last_seen_at", format_rfc3339(a.last_seen_at)},
              {"message", a.message},
              {"delivered", a.delivered},
              {"open", a.open},
              {"resolved_at", opt_time(a.resolved_at)}};
}

json series_to_json(const SeriesData& s, GraphType type, const std::string& site_id, const std::string& tz,
                    double threshold) {
  json channels = json::array();
  for (const auto& c : s.channels) channels.push_back({{"start_hz", c.start_hz}, {"stop_hz", c.stop_hz}});
  json values = json::array();
  for (const auto& row : s.values) {
    json r = json::array();
    for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
    values.push_back(std::move(r));
  }
  return json{{"graph_type", std::string(to_string(type))},
              {"site_id", site_id},
              {"timezone", tz},
              {"threshold_ref_dbm", threshold},
              {"axis", std::string(to_string(s.axis))},
              {"columns", s.columns},
              {"channels", channels},
              {"values", values}};
}

std::map<std::string, SiteStatus> status_by_site(const Store& store) {
  std::map<std::string, SiteStatus> out;
  for (auto& s : store.statuses()) out[s.site_id] = s;
  return out;
}

SiteStatus status_or_unknown(const std::map<std::string, SiteStatus>& m, const std::string& site_id) {
  if (auto it = m.find(site_id); it != m.end()) return it->second;
  SiteStatus st;
  st.site_id = site_id;
  return st;
}

bool valid_username(const std::string& u) {
  if (u.empty() || u.size() > 64) return false;
  return std::all_of(u.begin(), u.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '.' || c == '-'; });
}

const std::set<std::string> kFilterKeys = {"site_id", "date_from", "date_to", "freq_min",
                                           "freq_max", "threshold_ref", "limit",  "offset"};

}  // namespace

const std::vector<RouteInfo>& ApiService::routes() {
  static const std::vector<RouteInfo> kRoutes = {
      {"POST", "/api/signup", false},   {"POST", "/api/login", false},      {"GET", "/api/sites", true},
      {"GET", "/api/au", true},         {"GET", "/api/graph/{type}", true}, {"GET", "/api/ops/status", true},
      {"GET", "/api/ops/alerts", true},
  };
  return kRoutes;
}

ApiService::ApiService(Store& store, Clock& clock, ApiConfig config)
    : store_(store), clock_(clock), config_(config) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  char out[crypto_pwhash_STRBYTES];
  const auto ops = config_.hash_strength == HashStrength::minimal ? crypto_pwhash_OPSLIMIT_MIN
                                                                  : crypto_pwhash_OPSLIMIT_INTERACTIVE;
  const auto mem = config_.hash_strength == HashStrength::minimal ? crypto_pwhash_MEMLIMIT_MIN
                                                                  : crypto_pwhash_MEMLIMIT_INTERACTIVE;
  const std::string dummy = "not-a-real-password";
  if (crypto_pwhash_str(out, dummy.c_str(), dummy.size(), ops, mem) != 0) throw std::runtime_error("pwhash failed");
  dummy_digest_ = out;
}

ApiResponse ApiService::handle(const ApiRequest& r) {
  try {
    const RouteInfo* route = nullptr;
    bool path_known = false;
    std::string param;
    for (const auto& ri : routes()) {
      bool match = false;
      if (const auto brace = ri.pattern.find('{'); brace != std::string::npos) {
        const auto prefix = ri.pattern.substr(0, brace);
        if (r.path.starts_with(prefix) && r.path.size() > prefix.size() &&
            r.path.find('/', prefix.size()) == std::string::npos) {
          match = true;
          param = r.path.substr(prefix.size());
        }
      } else {
        match = r.path == ri.pattern;
      }
      if (!match) continue;
      path_known = true;
      if (ri.method == r.method) {
        route = &ri;
        break;
      }
    }
    if (!route) return error_response(path_known ? 405 : 404, path_known ? "method not allowed" : "not found");
    if (route->requires_session) {
      if (auto rejected = require_session(r)) return *rejected;
    }
    if (route->pattern == "/api/signup") return signup(r);
    if (route->pattern == "/api/login") return login(r);
    if (route->pattern == "/api/sites") return sites();
    if (route->pattern == "/api/au") return au(r);
    if (route->pattern == "/api/graph/{type}") return graph(r, param);
    if (route->pattern == "/api/ops/status") return ops_status(r);
    if (route->pattern == "/api/ops/alerts") return ops_alerts(r);
    return error_response(404, "not found");
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ApiResponse ApiService::signup(const ApiRequest& r) {
  json body;
  try {
    body = json::parse(r.body);
  } catch (const json::exception&) {
    return error_response(400, "body must be a JSON object");
  }
  if (!body.is_object() || !body.contains("username") || !body.contains("password") ||
      !body["username"].is_string() || !body["password"].is_string()) {
    return error_response(400, "username and password are required strings");
  }
  const auto username = body["username"].get<std::string>();
  const auto password = body["password"].get<std::string>();
  if (!valid_username(username)) return error_response(400, "username must be 1-64 characters of [A-Za-z0-9_.-]");
  if (password.size() < 8) return error_response(400, "password must be at least 8 characters");

  char digest[crypto_pwhash_STRBYTES];
  const auto ops = config_.hash_strength == HashStrength::minimal ? crypto_pwhash_OPSLIMIT_MIN
                                                                  : crypto_pwhash_OPSLIMIT_INTERACTIVE;
  const auto mem = config_.hash_strength == HashStrength::minimal ? crypto_pwhash_MEMLIMIT_MIN
                                                                  : crypto_pwhash_MEMLIMIT_INTERACTIVE;
  if (crypto_pwhash_str(digest, password.c_str(), password.size(), ops, mem) != 0) {
    return error_response(500, "password hashing failed");
  }
  if (!store_.create_user(UserRow{username, digest, clock_.now()})) return error_response(409, "username taken");
  return json_response(201, json{{"username", username}});
}

ApiResponse ApiService::login(const ApiRequest& r) {
  json body;
  try {
    body = json::parse(r.body);
  } catch (const json::exception&) {
    return error_response(400, "body must be a JSON object");
  }
  if (!body.is_object() || !body.contains("username") || !body.contains("password") ||
      !body["username"].is_string() || !body["password"].is_string()) {
    return error_response(400, "username and password are required strings");
  }
  const auto username = body["username"].get<std::string>();
  const auto password = body["password"].get<std::string>();
  const auto user = store_.user(username);
  // Unknown users are checked against a dummy digest so both failures cost the same.
  const std::string& digest = user ? user->password_digest : dummy_digest_;
  const bool ok = crypto_pwhash_str_verify(digest.c_str(), password.c_str(), password.size()) == 0;
  if (!ok || !user) return error_response(401, "invalid credentials");

  unsigned char raw[16];
  randombytes_buf(raw, sizeof raw);
  char hex[sizeof raw * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, raw, sizeof raw);
  const auto expires = clock_.now() + config_.session_ttl;
  store_.create_session(SessionRow{hex, username, expires});
  return json_response(200, json{{"token", hex}, {"expires_at", format_rfc3339(expires)}});
}

std::optional<ApiResponse> ApiService::require_session(const ApiRequest& r) {
  const auto auth = header(r, "Authorization");
  if (!auth || !auth->starts_with("Bearer ")) return error_response(401, "missing session token");
  const auto token = auth->substr(7);
  const auto session = store_.session(token);
  if (!session) return error_response(401, "invalid session token");
  if (clock_.now() >= session->expires_at) {
    store_.delete_session(token);
    return error_response(401, "session expired");
  }
  return std::nullopt;
}

ApiResponse ApiService::sites() {
  const auto statuses = status_by_site(store_);
  json out = json::array();
  for (const auto& s : store_.sites()) {
    out.push_back({{"site_id", s.site_id},
                   {"name", s.name},
                   {"latitude", s.latitude},
                   {"longitude", s.longitude},
                   {"timezone", s.timezone},
                   {"status", summarize(status_or_unknown(statuses, s.site_id))}});
  }
  return json_response(200, out);
}

std::optional<QueryFilter> ApiService::parse_filter(const std::map<std::string, std::string>& q,
                                                    std::vector<FieldError>& errors, int& status) const {
  status = 400;
  for (const auto& [k, v] : q) {
    if (!kFilterKeys.count(k)) errors.push_back({k, "unknown parameter"});
  }
  QueryFilter f;
  auto it = q.find("site_id");
  if (it == q.end() || it->second.empty()) {
    errors.push_back({"site_id", "required"});
    return std::nullopt;
  }
  f.site_id = it->second;
  const auto site = store_.site(f.site_id);
  if (!site) {
    status = 404;
    errors.push_back({"site_id", "unknown site"});
    return std::nullopt;
  }

  f.date_from = CivilDate{1970, 1, 1};
  f.date_to = CivilDate{2999, 12, 31};
  for (const char* key : {"date_from", "date_to"}) {
    if (auto d = q.find(key); d != q.end()) {
      try {
        (std::string(key) == "date_from" ? f.date_from : f.date_to) = parse_date(d->second);
      } catch (const std::exception&) {
        errors.push_back({key, "expected YYYY-MM-DD"});
      }
    }
  }
  if (f.date_to < f.date_from) errors.push_back({"date_to", "date range is empty (date_to before date_from)"});

  for (const char* key : {"freq_min", "freq_max"}) {
    if (auto v = q.find(key); v != q.end()) {
      Hz x = 0;
      if (!parse_number(v->second, x) || x < 0) {
        errors.push_back({key, "expected a non-negative integer in Hz"});
      } else {
        (std::string(key) == "freq_min" ? f.freq_min : f.freq_max) = x;
      }
    }
  }
  if (f.freq_min >= f.freq_max) errors.push_back({"freq_max", "freq_min must be below freq_max"});

  auto present = store_.thresholds_present(f.site_id);
  if (present.empty()) present = site->thresholds_dbm;
  if (auto v = q.find("threshold_ref"); v != q.end()) {
    double x = 0;
    if (!parse_number(v->second, x) || !std::isfinite(x)) {
      errors.push_back({"threshold_ref", "expected a number in dBm/20 MHz"});
    } else {
      auto m = std::find_if(present.begin(), present.end(), [x](double p) { return std::fabs(p - x) < 1e-9; });
      if (m == present.end()) {
        errors.push_back({"threshold_ref", "no results were computed for this threshold"});
      } else {
        f.threshold_ref_dbm = *m;
      }
    }
  } else if (std::find(present.begin(), present.end(), kDefaultReferencePower) != present.end()) {
    f.threshold_ref_dbm = kDefaultReferencePower;
  } else if (present.size() == 1) {
    f.threshold_ref_dbm = present.front();
  } else {
    errors.push_back({"threshold_ref", "required: several thresholds are available"});
  }
  if (!errors.empty()) return std::nullopt;
  return f;
}

AuQuery ApiService::to_store_query(const QueryFilter& f) const {
  const auto site = store_.site(f.site_id);
  const auto tz = TimeZone::load(site ? site->timezone : "UTC");
  AuQuery q;
  q.site_id = f.site_id;
  q.threshold_ref_dbm = f.threshold_ref_dbm;
  q.from = tz.local_midnight(f.date_from);
  q.to = tz.local_midnight(next_day(f.date_to));
  q.freq_min = f.freq_min;
  q.freq_max = f.freq_max;
  return q;
}

ApiResponse ApiService::au(const ApiRequest& r) {
  auto filter_params = r.query;
  std::size_t limit = config_.default_page_size;
  std::size_t offset = 0;
  std::vector<FieldError> errors;
  if (auto v = filter_params.find("limit"); v != filter_params.end()) {
    if (!parse_number(v->second, limit) || limit == 0 || limit > config_.max_page_size) {
      errors.push_back({"limit", "expected an integer in 1.." + std::to_string(config_.max_page_size)});
    }
  }
  if (auto v = filter_params.find("offset"); v != filter_params.end()) {
    if (!parse_number(v->second, offset)) errors.push_back({"offset", "expected a non-negative integer"});
  }
  int status = 400;
  const auto filter = parse_filter(filter_params, errors, status);
  if (!filter || !errors.empty()) return validation_error(status, errors);

  auto q = to_store_query(*filter);
  const auto total = store_.count_au(q);
  q.limit = limit;
  q.offset = offset;
  json rows = json::array();
  for (const auto& rec : store_.query_au(q)) rows.push_back(au_to_json(rec));
  return json_response(200, json{{"site_id", filter->site_id},
                                 {"threshold_ref_dbm", filter->threshold_ref_dbm},
                                 {"total", total},
                                 {"offset", offset},
                                 {"limit", limit},
                                 {"rows", rows}});
}

ApiResponse ApiService::graph(const ApiRequest& r, const std::string& type_name) {
  std::vector<FieldError> errors;
  std::optional<GraphType> type;
  try {
    type = parse_graph_type(type_name);
  } catch (const InvalidArgument&) {
    errors.push_back({"type", "unknown graph type '" + type_name + "'"});
  }
  auto params = r.query;
  for (const char* key : {"limit", "offset"}) {
    if (params.count(key)) errors.push_back({key, "not supported for graph series"});
    params.erase(key);
  }
  int status = 400;
  const auto filter = parse_filter(params, errors, status);
  if (!filter || !errors.empty() || !type) return validation_error(status, errors);

  const auto site = store_.site(filter->site_id);
  const auto tz = TimeZone::load(site->timezone);
  const auto records = store_.query_au(to_store_query(*filter));
  SeriesData series;
  if (!records.empty()) series = aggregate_series(records, *type, tz);
  return json_response(200, series_to_json(series, *type, filter->site_id, tz.name(), filter->threshold_ref_dbm));
}

ApiResponse ApiService::ops_status(const ApiRequest& r) {
  const auto statuses = status_by_site(store_);
  const auto sites = store_.sites();
  json out = json::array();
  if (auto it = r.query.find("site_id"); it != r.query.end()) {
    if (std::none_of(sites.begin(), sites.end(), [&](const SiteRecord& s) { return s.site_id == it->second; })) {
      return error_response(404, "unknown site " + it->second);
    }
    out.push_back(status_to_json(status_or_unknown(statuses, it->second)));
    return json_response(200, out);
  }
  for (const auto& s : sites) out.push_back(status_to_json(status_or_unknown(statuses, s.site_id)));
  return json_response(200, out);
}

ApiResponse ApiService::ops_alerts(const ApiRequest& r) {
  const bool open_only = r.query.count("open") && r.query.at("open") == "1";
  json out = json::array();
  for (const auto& a : store_.alerts(open_only)) {
    if (auto it = r.query.find("site_id"); it != r.query.end() && it->second != a.site_id) continue;
    out.push_back(alert_to_json(a));
  }
  return json_response(200, out);
}

}  // namespace specmon
