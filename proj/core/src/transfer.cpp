#include "specmon/transfer.hpp"

#include <fstream>
#include <vector>

#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"

namespace specmon {

namespace fs = std::filesystem;

std::string_view to_string(TransferPhase phase) {
  switch (phase) {
    case TransferPhase::connect: return "connect";
    case TransferPhase::auth: return "auth";
    case TransferPhase::write: return "write";
    case TransferPhase::read: return "read";
  }
  return "unknown";
}

std::string remote_join(const std::string& a, const std::string& b) {
  auto trim = [](std::string s) {
    while (!s.empty() && s.front() == '/') s.erase(s.begin());
    while (!s.empty() && s.back() == '/') s.pop_back();
    return s;
  };
  const auto x = trim(a);
  const auto y = trim(b);
  if (x.empty()) return y;
  if (y.empty()) return x;
  return x + "/" + y;
}

LocalDirClient::LocalDirClient(fs::path root, const Clock& clock, Hooks hooks)
    : root_(std::move(root)), clock_(clock), hooks_(std::move(hooks)) {}

fs::path LocalDirClient::resolve(const std::string& remote) const {
  fs::path rel(remote);
  for (const auto& part : rel) {
    if (part == "..") throw TransferError(TransferPhase::write, "remote path escapes root: " + remote);
  }
  return root_ / rel.relative_path();
}

void LocalDirClient::put_file(const fs::path& local, const std::string& remote) {
  if (!fs::is_directory(root_)) throw TransferError(TransferPhase::connect, "endpoint root missing: " + root_.string());
  const auto target = resolve(remote);
  std::ifstream in(local, std::ios::binary);
  if (!in) throw TransferError(TransferPhase::read, "cannot read local file " + local.string());
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw TransferError(TransferPhase::write, "cannot create remote directory: " + ec.message());
  const auto tmp = temp_sibling(target);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TransferError(TransferPhase::write, "cannot create " + tmp.string());
    std::vector<char> buf(1 << 16);
    std::uint64_t total = 0;
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const auto n = in.gcount();
      if (n <= 0) break;
      out.write(buf.data(), n);
      if (!out) throw TransferError(TransferPhase::write, "short write to " + tmp.string());
      total += static_cast<std::uint64_t>(n);
      // A throwing hook models the process dying mid-upload: the temp file is left behind.
      if (hooks_.on_chunk) hooks_.on_chunk(total);
    }
    out.flush();
    if (!out) throw TransferError(TransferPhase::write, "flush failed on " + tmp.string());
  }
  auto stamp = clock_.now();
  if (fs::exists(target)) {
    const auto prev = from_file_time(fs::last_write_time(target));
    if (stamp <= prev) stamp = prev + Micros{1};
  }
  fs::last_write_time(tmp, to_file_time(stamp), ec);
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw TransferError(TransferPhase::write, "rename failed for " + remote);
  }
}

std::vector<RemoteEntry> LocalDirClient::list(const std::string& prefix) {
  if (!fs::is_directory(root_)) throw TransferError(TransferPhase::connect, "endpoint root missing: " + root_.string());
  std::vector<RemoteEntry> out;
  const auto dir = resolve(prefix);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || is_temp_name(e.path())) continue;
    out.push_back(RemoteEntry{remote_join(prefix, e.path().filename().string()), e.file_size(),
                              from_file_time(e.last_write_time())});
  }
  std::sort(out.begin(), out.end(), [](const RemoteEntry& a, const RemoteEntry& b) { return a.path < b.path; });
  return out;
}

Timestamp LocalDirClient::mtime(const std::string& remote) {
  if (!fs::is_directory(root_)) throw TransferError(TransferPhase::connect, "endpoint root missing: " + root_.string());
  const auto p = resolve(remote);
  std::error_code ec;
  auto t = fs::last_write_time(p, ec);
  if (ec) throw TransferError(TransferPhase::read, "no such remote file: " + remote);
  return from_file_time(t);
}

bool LocalDirClient::reachable() { return fs::is_directory(root_); }

void GatedClient::check() {
  ++attempts_;
  if (blocked_.load()) throw TransferError(TransferPhase::connect, "network unreachable (injected)");
}

void GatedClient::put_file(const fs::path& local, const std::string& remote) {
  check();
  inner_.put_file(local, remote);
}

std::vector<RemoteEntry> GatedClient::list(const std::string& prefix) {
  check();
  return inner_.list(prefix);
}

Timestamp GatedClient::mtime(const std::string& remote) {
  check();
  return inner_.mtime(remote);
}

bool GatedClient::reachable() {
  ++attempts_;
  return !blocked_.load() && inner_.reachable();
}

std::unique_ptr<TransferClient> make_transfer_client(const TransferEndpoint& endpoint, const Clock& clock) {
  if (endpoint.kind == BackendKind::local_dir) {
    return std::make_unique<LocalDirClient>(fs::path(endpoint.address) / endpoint.base_path, clock);
  }
  return std::make_unique<FtpClient>(endpoint);
}

}  // namespace specmon
