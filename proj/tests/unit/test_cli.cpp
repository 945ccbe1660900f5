#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include "oracles.hpp"
#include "specmon/sweep_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SPECMON_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("help lists the subcommands") {
  const auto r = run("--help");
  CHECK(r.code == 0);
  for (const char* sub : {"simulate", "agent", "collector", "monitor", "serve", "demo"}) {
    CHECK_MESSAGE(r.out.find(sub) != std::string::npos, sub);
  }
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("simulate writes one file per minute") {
  specmon::testing::TempDir dir("cli");
  const auto r = run("simulate --out " + dir.path().string() + " --hours 1 --gate -200");
  INFO(r.out);
  REQUIRE(r.code == 0);
  const auto days = specmon::list_day_dirs(dir.path());
  REQUIRE(days.size() == 1);
  CHECK(specmon::scan_day_dir(specmon::day_dir(dir.path(), days[0])).data_files.size() == 60);
  CHECK(run("simulate --out " + dir.path().string() + " --hours 0").code == 2);
}

TEST_CASE("bad config key exits 2 naming the file and key") {
  specmon::testing::TempDir dir("cli");
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"api": {"port": 1, "hsot": "x"}})";
  const auto r = run("serve --config " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.out.find(cfg.string()) != std::string::npos);
  CHECK(r.out.find("/api/hsot") != std::string::npos);
  CHECK(run("serve --config " + (dir / "missing.json").string()).code == 2);
}

TEST_CASE("demo with no sites is a clean no-op") {
  specmon::testing::TempDir dir("cli");
  const auto r = run("demo --sites 0 --days 1 --scratch " + (dir / "s").string());
  INFO(r.out);
  CHECK(r.code == 0);
}
