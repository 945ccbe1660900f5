#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specmon/agent.hpp"
#include "specmon/collector.hpp"
#include "specmon/monitor.hpp"
#include "specmon/ops.hpp"
#include "specmon/sim.hpp"

namespace specmon {

enum class FaultKind { network_block, recorder_halt, transfer_suppress };
std::string_view to_string(FaultKind kind);
FaultKind parse_fault_kind(std::string_view name);
/// The alert each injected fault is expected to raise.
FailureType expected_failure(FaultKind kind);

struct Fault {
  std::size_t site = 0;
  FaultKind kind = FaultKind::network_block;
  /// Offsets from the demo start.
  Micros start{};
  Micros duration{};
};

struct DemoOptions {
  std::size_t n_sites = 3;
  int days = 2;
  /// Simulated seconds per real second; 0 = as fast as possible.
  double acceleration = 0.0;
  std::filesystem::path scratch_dir;
  /// Midnight UTC; 2024-01-01 is a Monday.
  Timestamp start = from_unix_us(1'704'067'200'000'000);
  double sweep_time_s = 10.0;
  int compression_level = 9;
  std::vector<Fault> faults;
  /// Per-site environment; defaults to demo_environment(i).
  std::function<Environment(std::size_t)> environment;
  /// Site time zone used for the registry and the simulator.
  std::string timezone = "UTC";
  MonitorConfig monitor;
  /// Family-wise confidence of the AU oracle check across all compared rows.
  double oracle_confidence = 0.999;
  bool check_api = true;
};

struct DemoCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct DemoResult {
  std::vector<DemoCheck> checks;
  std::size_t rows = 0;
  std::size_t oracle_rows = 0;
  std::vector<Alert> alerts;
  /// Every persisted AU row, per site in (hour, channel) order.
  std::vector<AURecord> records;
  /// Monitor snapshot taken right after each scheduled check.
  std::vector<SiteStatus> status_history;
  std::vector<IngestReport> ingests;
  std::vector<AgentCounters> counters;
  bool ok() const;
  std::string summary() const;
};

std::string site_name(std::size_t index);

/// Four 5-MHz channels over 0-20 MHz at 1 MHz rbw: a saturated band, a daytime-high band,
/// an empty channel and a weekday-only band.
Environment demo_environment(std::size_t index, std::uint64_t seed = 1);

/// Runs n agents + collector + monitor (+ API) against a local-dir endpoint on one
/// accelerated clock, then verifies row counts, oracle AU and the alert set.
DemoResult run_demo(const DemoOptions& options);

}  // namespace specmon
