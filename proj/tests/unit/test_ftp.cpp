#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/transfer.hpp"

using namespace specmon;
using namespace specmon::testing;
namespace fs = std::filesystem;

namespace {

struct FtpServer {
  pid_t pid = -1;
  int port = 0;
  int exit_code = 0;

  FtpServer(const fs::path& root, const std::string& user, const std::string& pass) {
    int fds[2];
    if (pipe(fds) != 0) return;
    pid = fork();
    if (pid == 0) {
      dup2(fds[1], 1);
      close(fds[0]);
      execl(SPECMON_PYTHON, SPECMON_PYTHON, SPECMON_FTP_SERVER, root.c_str(), user.c_str(), pass.c_str(), nullptr);
      _exit(127);
    }
    close(fds[1]);
    std::string line;
    char ch;
    while (read(fds[0], &ch, 1) == 1 && ch != '\n') line.push_back(ch);
    close(fds[0]);
    if (!line.empty()) {
      port = std::stoi(line);
    } else {
      int status = 0;
      waitpid(pid, &status, 0);
      exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      pid = -1;
    }
  }
  ~FtpServer() {
    if (pid > 0) {
      kill(pid, SIGTERM);
      waitpid(pid, nullptr, 0);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  doctest::Context ctx(argc, argv);
  TempDir probe("ftp-probe");
  {
    FtpServer s(probe.path(), "u", "p");
    if (s.port == 0) {
      std::fprintf(stderr, "FTP test server unavailable (exit %d); skipping\n", s.exit_code);
      return 77;
    }
  }
  return ctx.run();
}

TEST_CASE("ftp put, list, mtime and reachability") {
  TempDir tmp("ftp");
  fs::create_directories(tmp / "root");
  FtpServer server(tmp / "root", "agent", "s3cret");
  REQUIRE(server.port > 0);
  TransferEndpoint ep{BackendKind::ftp, "ftp://127.0.0.1:" + std::to_string(server.port) + "/", "agent", "s3cret",
                      "central"};
  FtpClient c(ep);
  CHECK(c.reachable());

  std::string payload;
  for (int i = 0; i < 100'000; ++i) payload.push_back(static_cast<char>(i * 31));
  write_file_atomic(tmp / "a.bin", payload);
  c.put_file(tmp / "a.bin", "alpha/alpha_20240101.lzma-archive");
  CHECK(read_file(tmp / "root" / "central" / "alpha" / "alpha_20240101.lzma-archive") == payload);

  const auto entries = c.list("alpha");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].path == "alpha/alpha_20240101.lzma-archive");
  CHECK(entries[0].size == payload.size());
  const auto m = c.mtime("alpha/alpha_20240101.lzma-archive");
  CHECK(std::chrono::abs(m - floor_to(WallClock().now(), std::chrono::seconds{1})) < std::chrono::minutes{2});
  CHECK_THROWS_AS(c.mtime("alpha/missing"), TransferError);
  CHECK(c.list("nothing").empty());

  // file names with spaces survive escaping
  c.put_file(tmp / "a.bin", "hb/site one/reach");
  CHECK(fs::exists(tmp / "root" / "central" / "hb" / "site one" / "reach"));
}

TEST_CASE("ftp auth failure is reported as such") {
  TempDir tmp("ftp");
  fs::create_directories(tmp / "root");
  FtpServer server(tmp / "root", "agent", "s3cret");
  REQUIRE(server.port > 0);
  FtpClient c({BackendKind::ftp, "ftp://127.0.0.1:" + std::to_string(server.port) + "/", "agent", "wrong", ""});
  write_file_atomic(tmp / "a.bin", "x");
  try {
    c.put_file(tmp / "a.bin", "a.bin");
    FAIL("expected TransferError");
  } catch (const TransferError& e) {
    CHECK(e.phase() == TransferPhase::auth);
  }
  CHECK_FALSE(c.reachable());
}

TEST_CASE("ftp connect failure") {
  // grab a port nobody listens on
  FtpClient c({BackendKind::ftp, "ftp://127.0.0.1:1/", "u", "p", ""});
  CHECK_FALSE(c.reachable());
  try {
    c.list("");
    FAIL("expected TransferError");
  } catch (const TransferError& e) {
    CHECK(e.phase() == TransferPhase::connect);
  }
}
