#include <CLI11.hpp>

#include <spdlog/spdlog.h>

#include <iostream>

#include "commands.hpp"
#include "specmon/error.hpp"

using namespace specmon;
using namespace specmon::cli;

int main(int argc, char** argv) {
  CLI::App app{"specmon: multi-site spectrum monitoring pipeline"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write simulated minute files for a span of hours");
  simulate->add_option("--env", sim.env_file, "Environment JSON (default: built-in demo environment)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out_dir, "Output data directory")->required();
  simulate->add_option("--hours", sim.hours, "Hours of data to generate")->capture_default_str();
  simulate->add_option("--start", sim.start, "RFC 3339 start time (default 2024-01-01T00:00:00Z)");
  simulate->add_option("--gate", sim.gate_dbm, "Recording gate threshold, dBm per bin")->capture_default_str();

  AgentArgs agent;
  auto* agent_cmd = app.add_subcommand("agent", "Run a site agent");
  agent_cmd->add_option("--config", agent.config, "Config file")->required();
  agent_cmd->add_option("--clock", agent.clock, "accelerated|wall (default: clock.mode from the config)")
      ->check(CLI::IsMember({"accelerated", "wall"}));

  CollectorArgs col;
  auto* collector = app.add_subcommand("collector", "Central ingest");
  collector->require_subcommand(1);
  auto* ingest = collector->add_subcommand("ingest", "Ingest one site-day");
  ingest->add_option("--config", col.config, "Config file")->required();
  ingest->add_option("--site", col.site, "Site id")->required();
  ingest->add_option("--day", col.day, "Day, YYYY-MM-DD or YYYYMMDD")->required();
  auto* run_all = collector->add_subcommand("run", "Ingest every archive in the inbox");
  run_all->add_option("--config", col.config, "Config file")->required();
  run_all->add_flag("--all", col.all, "All sites (the only mode)")->required();

  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Operations monitor");
  monitor->require_subcommand(1);
  auto* monitor_run = monitor->add_subcommand("run", "Run the failure detectors");
  monitor_run->add_option("--config", mon.config, "Config file")->required();
  monitor_run->add_flag("--once", mon.once, "Run one check cycle, print status, exit 1 if any alert is open");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP query API");
  serve_cmd->add_option("--config", serve.config, "Config file")->required();
  serve_cmd->add_option("--port", serve.port, "Listen port (overrides api.port)");

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo", "End-to-end accelerated demo with built-in checks");
  demo_cmd->add_option("--sites", demo.sites, "Number of simulated sites")->capture_default_str();
  demo_cmd->add_option("--days", demo.days, "Simulated days")->capture_default_str();
  demo_cmd->add_option("--acceleration", demo.acceleration, "Simulated seconds per real second; 0 = unpaced")
      ->capture_default_str();
  demo_cmd->add_option("--scratch", demo.scratch, "Scratch directory (default: a fresh temp dir)");
  demo_cmd->add_option("--sweep-time", demo.sweep_time_s, "Seconds between sweeps")->capture_default_str();
  demo_cmd->add_option("--compression-level", demo.compression_level, "LZMA preset 1..9")
      ->check(CLI::Range(1, 9))
      ->capture_default_str();
  demo_cmd->add_option("--fault", demo.faults, "Injected fault site:kind:start_h:duration_h, kind one of "
                                               "network_block|recorder_halt|transfer_suppress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);
  spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");

  try {
    if (*simulate) return run_simulate(sim);
    if (*agent_cmd) return run_agent(agent);
    if (*ingest) return run_collector_ingest(col);
    if (*run_all) return run_collector_all(col);
    if (*monitor_run) return run_monitor(mon);
    if (*serve_cmd) return run_serve(serve);
    if (*demo_cmd) return run_demo_command(demo);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}
