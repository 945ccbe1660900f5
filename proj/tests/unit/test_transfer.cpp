#include <doctest.h>

#include <fstream>

#include "oracles.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/transfer.hpp"

using namespace specmon;
using namespace specmon::testing;
namespace fs = std::filesystem;

namespace {
const Timestamp kT0 = from_unix_us(1'704'067'200'000'000);
}

TEST_CASE("remote_join") {
  CHECK(remote_join("a", "b") == "a/b");
  CHECK(remote_join("/a/", "/b") == "a/b");
  CHECK(remote_join("", "b") == "b");
  CHECK(remote_join("a", "") == "a");
}

TEST_CASE("local-dir put, list and mtime") {
  TempDir tmp("xfer");
  fs::create_directories(tmp / "remote");
  ManualClock clock(kT0);
  LocalDirClient c(tmp / "remote", clock);
  CHECK(c.reachable());

  std::ofstream(tmp / "f.bin", std::ios::binary) << std::string(200'000, 'q');
  c.put_file(tmp / "f.bin", "site/x.bin");
  CHECK(read_file(tmp / "remote" / "site" / "x.bin") == read_file(tmp / "f.bin"));
  CHECK(c.mtime("site/x.bin") == kT0);

  const auto entries = c.list("site");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].path == "site/x.bin");
  CHECK(entries[0].size == 200'000);
  CHECK(c.list("nothing-here").empty());
  CHECK_THROWS_AS(c.mtime("site/missing"), TransferError);
  CHECK_THROWS_AS(c.put_file(tmp / "f.bin", "../escape"), TransferError);
  CHECK_THROWS_AS(c.put_file(tmp / "no-such-local", "site/y"), TransferError);

  // re-upload at the same simulated instant still moves mtime forward
  c.put_file(tmp / "f.bin", "site/x.bin");
  CHECK(c.mtime("site/x.bin") > kT0);
  clock.advance(kHour);
  c.put_file(tmp / "f.bin", "site/x.bin");
  CHECK(c.mtime("site/x.bin") == kT0 + kHour);
}

TEST_CASE("a killed upload leaves only a temp file that list ignores") {
  TempDir tmp("xfer");
  fs::create_directories(tmp / "remote");
  ManualClock clock(kT0);
  LocalDirClient::Hooks hooks;
  std::uint64_t chunks = 0;
  hooks.on_chunk = [&](std::uint64_t bytes) {
    ++chunks;
    if (bytes >= (1u << 16)) throw TransferError(TransferPhase::write, "killed");
  };
  LocalDirClient c(tmp / "remote", clock, hooks);
  std::ofstream(tmp / "f.bin", std::ios::binary) << std::string(300'000, 'q');
  CHECK_THROWS_AS(c.put_file(tmp / "f.bin", "site/x.bin"), TransferError);
  CHECK(chunks == 1);
  CHECK_FALSE(fs::exists(tmp / "remote" / "site" / "x.bin"));
  CHECK(c.list("site").empty());
  std::size_t temps = 0;
  for (const auto& e : fs::directory_iterator(tmp / "remote" / "site")) temps += is_temp_name(e.path());
  CHECK(temps == 1);
}

TEST_CASE("missing root is a connect failure") {
  TempDir tmp("xfer");
  ManualClock clock(kT0);
  LocalDirClient c(tmp / "absent", clock);
  std::ofstream(tmp / "f") << "x";
  CHECK_FALSE(c.reachable());
  try {
    c.put_file(tmp / "f", "a");
    FAIL("expected TransferError");
  } catch (const TransferError& e) {
    CHECK(e.phase() == TransferPhase::connect);
  }
  CHECK_THROWS_AS(c.list(""), TransferError);
}

TEST_CASE("gated client blocks every verb") {
  TempDir tmp("xfer");
  fs::create_directories(tmp / "remote");
  ManualClock clock(kT0);
  LocalDirClient inner(tmp / "remote", clock);
  std::atomic<bool> blocked{true};
  GatedClient g(inner, blocked);
  std::ofstream(tmp / "f") << "x";
  CHECK_THROWS_AS(g.put_file(tmp / "f", "a"), TransferError);
  CHECK_THROWS_AS(g.list(""), TransferError);
  CHECK_THROWS_AS(g.mtime("a"), TransferError);
  CHECK_FALSE(g.reachable());
  blocked = false;
  g.put_file(tmp / "f", "a");
  CHECK(g.list("").size() == 1);
  CHECK(g.reachable());
  CHECK(g.attempts() == 7);
}

TEST_CASE("factory honours base_path") {
  TempDir tmp("xfer");
  fs::create_directories(tmp / "remote" / "central");
  ManualClock clock(kT0);
  TransferEndpoint ep{BackendKind::local_dir, (tmp / "remote").string(), "", "", "central"};
  auto c = make_transfer_client(ep, clock);
  std::ofstream(tmp / "f") << "x";
  c->put_file(tmp / "f", "hb/s/reach");
  CHECK(fs::exists(tmp / "remote" / "central" / "hb" / "s" / "reach"));
}
