#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "oracles.hpp"
#include "specmon/config.hpp"
#include "specmon/error.hpp"

using namespace specmon;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = SPECMON_CONFIG_DIR;

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "/etc/x/test.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSite = R"("site": {"site_id": "s1", "freq_start_hz": 0, "freq_stop_hz": 20000000,
                         "rbw_hz": 1000000, "sweep_time_s": 10})";

}  // namespace

TEST_CASE("shipped example configs parse") {
  const auto agent = load_config(kConfigDir / "site-agent.json");
  REQUIRE(agent.agent);
  CHECK(agent.agent->params.site_id == "alpha");
  CHECK(agent.agent->compression_level == 9);
  CHECK(agent.agent->endpoint.kind == BackendKind::local_dir);
  CHECK(fs::path(agent.agent->endpoint.address).is_absolute());
  REQUIRE(agent.source);
  REQUIRE(agent.source->environment);
  CHECK(agent.source->environment->bands.size() == 3);
  CHECK(agent.clock.mode == ClockMode::accelerated);
  CHECK(agent.clock.duration == 2 * kDay);

  const auto central = load_config(kConfigDir / "central.json");
  REQUIRE(central.central);
  REQUIRE(central.sites.size() == 1);
  CHECK(central.sites[0].thresholds_dbm == std::vector<double>{-72.0, -80.0});
  REQUIRE(central.monitor);
  CHECK(central.monitor->heartbeat_window == std::chrono::seconds{900});
  REQUIRE(central.monitor_endpoint);
  CHECK(central.monitor_endpoint->address == central.central->collector.inbox_root.string());
  REQUIRE(central.api);
  CHECK(central.api_port == 8080);

  const auto env = load_environment(kConfigDir / "environment.json");
  CHECK(env.rbw_hz == 1e6);
}

TEST_CASE("unknown keys name the file and pointer") {
  auto msg = error_of(R"({"colour": 1})");
  CHECK(msg.find("/etc/x/test.json") != std::string::npos);
  CHECK(msg.find("/colour") != std::string::npos);

  msg = error_of(std::string("{") + kSite + R"(, "agent": {"data_dir": "d",
      "endpoint": {"kind": "local_dir", "root": "r", "passwd": "x"}}})");
  CHECK(msg.find("/agent/endpoint/passwd") != std::string::npos);

  msg = error_of(R"({"monitor": {"endpoint": {"kind": "local_dir", "root": "r"}, "check_intervl_s": 5}})");
  CHECK(msg.find("/monitor/check_intervl_s") != std::string::npos);

  msg = error_of(R"({"api": {"port": 80, "hash": "minimal"}})");
  CHECK(msg.find("/api/hash") != std::string::npos);
}

TEST_CASE("value errors") {
  CHECK(error_of("not json").find("/etc/x/test.json") != std::string::npos);
  CHECK(error_of(R"({"sites": [{"site_id": "a_b"}]})").find("/sites/0/site_id") != std::string::npos);
  CHECK(error_of(R"({"sites": [{"site_id": "a"}, {"site_id": "a"}]})").find("duplicate") != std::string::npos);
  CHECK(error_of(R"({"sites": [{"site_id": "a", "timezone": "Mars/Olympus"}]})").find("/sites/0/timezone") !=
        std::string::npos);
  CHECK(error_of(R"({"agent": {"data_dir": "d"}})").find("requires a 'site'") != std::string::npos);
  CHECK(error_of(R"({"clock": {"mode": "fast"}})").find("/clock/mode") != std::string::npos);
  CHECK(error_of(R"({"api": {"port": 70000}})").find("/api/port") != std::string::npos);
  CHECK(error_of(R"({"monitor": {}})").find("/monitor/endpoint") != std::string::npos);
  CHECK(error_of(std::string("{") + kSite + R"(, "agent": {"data_dir": "d",
      "endpoint": {"kind": "ftp", "url": "http://x"}}})")
            .find("/agent/endpoint/url") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("relative paths resolve against the config file") {
  const auto cfg = parse_config(std::string("{") + kSite + R"(, "agent": {"data_dir": "data",
      "endpoint": {"kind": "local_dir", "root": "/abs/inbox"}}})",
                                "/etc/x/test.json");
  CHECK(cfg.agent->data_dir == fs::path("/etc/x/data"));
  CHECK(cfg.agent->endpoint.address == "/abs/inbox");
}

TEST_CASE("credential environment overrides") {
  TransferEndpoint e;
  e.username = "cfg";
  e.password = "cfgpw";
  ::unsetenv("SPECMON_FTP_USER");
  ::unsetenv("SPECMON_FTP_PASSWORD");
  apply_credential_env(e);
  CHECK(e.username == "cfg");
  ::setenv("SPECMON_FTP_USER", "envuser", 1);
  ::setenv("SPECMON_FTP_PASSWORD", "envpw", 1);
  apply_credential_env(e);
  CHECK(e.username == "envuser");
  CHECK(e.password == "envpw");
  ::unsetenv("SPECMON_FTP_USER");
  ::unsetenv("SPECMON_FTP_PASSWORD");
}
