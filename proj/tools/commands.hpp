#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace specmon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct SimulateArgs {
  std::filesystem::path env_file;
  std::filesystem::path out_dir;
  double hours = 1.0;
  std::string start;
  double gate_dbm = -90.0;
};

struct AgentArgs {
  std::filesystem::path config;
  /// Empty: use clock.mode from the config.
  std::string clock;
};

struct CollectorArgs {
  std::filesystem::path config;
  std::string site;
  std::string day;
  bool all = false;
};

struct MonitorArgs {
  std::filesystem::path config;
  bool once = false;
};

struct ServeArgs {
  std::filesystem::path config;
  std::optional<int> port;
};

struct DemoArgs {
  std::size_t sites = 3;
  int days = 2;
  double acceleration = 0.0;
  std::filesystem::path scratch;
  double sweep_time_s = 10.0;
  int compression_level = 9;
  std::vector<std::string> faults;
};

int run_simulate(const SimulateArgs& args);
int run_agent(const AgentArgs& args);
int run_collector_ingest(const CollectorArgs& args);
int run_collector_all(const CollectorArgs& args);
int run_monitor(const MonitorArgs& args);
int run_serve(const ServeArgs& args);
int run_demo_command(const DemoArgs& args);

}  // namespace specmon::cli
