#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "specmon/aggregate.hpp"
#include "specmon/clock.hpp"
#include "specmon/store.hpp"

namespace specmon {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct RouteInfo {
  std::string method;
  /// Path pattern; "{type}" marks a parameter segment.
  std::string pattern;
  bool requires_session = true;
};

enum class HashStrength { interactive, minimal };

struct ApiConfig {
  Micros session_ttl = kDay;
  std::size_t default_page_size = 10'000;
  std::size_t max_page_size = 100'000;
  /// Argon2id cost; `minimal` exists for tests.
  HashStrength hash_strength = HashStrength::interactive;
};

/// QueryFilter after validation, in store terms.
struct QueryFilter {
  std::string site_id;
  CivilDate date_from{};
  CivilDate date_to{};
  Hz freq_min = 0;
  Hz freq_max = std::numeric_limits<Hz>::max();
  double threshold_ref_dbm = kDefaultReferencePower;
};

struct FieldError {
  std::string field;
  std::string message;
};

/// Authenticated JSON API over the store. Transport-independent: see ApiServer.
class ApiService {
 public:
  ApiService(Store& store, Clock& clock, ApiConfig config = {});

  static const std::vector<RouteInfo>& routes();

  ApiResponse handle(const ApiRequest& request);

  /// Validates query parameters into a filter; resolution needs the site registry.
  std::optional<QueryFilter> parse_filter(const std::map<std::string, std::string>& query,
                                          std::vector<FieldError>& errors, int& status) const;
  AuQuery to_store_query(const QueryFilter& filter) const;

 private:
  ApiResponse signup(const ApiRequest& r);
  ApiResponse login(const ApiRequest& r);
  std::optional<ApiResponse> require_session(const ApiRequest& r);
  ApiResponse sites();
  ApiResponse au(const ApiRequest& r);
  ApiResponse graph(const ApiRequest& r, const std::string& type);
  ApiResponse ops_status(const ApiRequest& r);
  ApiResponse ops_alerts(const ApiRequest& r);

  Store& store_;
  Clock& clock_;
  ApiConfig config_;
  std::string dummy_digest_;
};

/// httplib binding of ApiService. Handles requests on a pool of worker threads.
class ApiServer {
 public:
  ApiServer(ApiService& service, std::string host = "127.0.0.1", int port = 0);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and starts serving in a background thread; returns the bound port.
  int start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_;
  std::thread thread_;
};

}  // namespace specmon
