#pragma once

// Shared declarative config (JSON) used by every CLI subcommand. Each subcommand reads the
// sections it needs; every section present is validated up front and unknown keys are
// rejected with "<file>: <json-pointer>: message".

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specmon/agent.hpp"
#include "specmon/api.hpp"
#include "specmon/collector.hpp"
#include "specmon/monitor.hpp"
#include "specmon/sim.hpp"
#include "specmon/store.hpp"

namespace specmon {

enum class SourceKind { simulated, replay };

struct SourceConfig {
  SourceKind kind = SourceKind::simulated;
  /// Simulated: environment description (inline object or a file path in the config).
  std::optional<Environment> environment;
  /// Replay: directory of previously recorded minute files.
  std::filesystem::path replay_dir;
};

enum class ClockMode { wall, accelerated };

struct ClockConfig {
  ClockMode mode = ClockMode::wall;
  /// Simulated start for the accelerated clock.
  Timestamp start{};
  /// Simulated seconds per real second; 0 runs as fast as possible.
  double acceleration = 0.0;
  /// Accelerated only: how much simulated time to run.
  Micros duration = kDay;
};

struct CentralConfig {
  CollectorConfig collector;
  std::filesystem::path database;
};

struct AppConfig {
  std::filesystem::path source_file;
  std::optional<AgentConfig> agent;
  std::optional<SourceConfig> source;
  std::optional<CentralConfig> central;
  std::vector<SiteRecord> sites;
  std::optional<MonitorConfig> monitor;
  /// Central endpoint the monitor reads (markers and inbox listing).
  std::optional<TransferEndpoint> monitor_endpoint;
  std::optional<ApiConfig> api;
  std::string api_host = "127.0.0.1";
  int api_port = 8080;
  ClockConfig clock;
};

/// Throws ConfigError (a ParseError) naming the file and key.
AppConfig parse_config(std::string_view json_text, const std::filesystem::path& source_file);
AppConfig load_config(const std::filesystem::path& path);

/// Environment variables SPECMON_FTP_USER / SPECMON_FTP_PASSWORD override endpoint credentials.
void apply_credential_env(TransferEndpoint& endpoint);

}  // namespace specmon
