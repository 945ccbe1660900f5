#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmon/clock.hpp"

namespace specmon {

enum class TransferPhase { connect, auth, write, read };
std::string_view to_string(TransferPhase phase);

class TransferError : public std::runtime_error {
 public:
  TransferError(TransferPhase phase, const std::string& what)
      : std::runtime_error(std::string(to_string(phase)) + ": " + what), phase_(phase) {}
  TransferPhase phase() const noexcept { return phase_; }

 private:
  TransferPhase phase_;
};

struct RemoteEntry {
  /// Path relative to the endpoint root, '/'-separated.
  std::string path;
  std::uint64_t size = 0;
  Timestamp mtime{};
};

enum class BackendKind { local_dir, ftp };

struct TransferEndpoint {
  BackendKind kind = BackendKind::local_dir;
  /// local_dir: root directory. ftp: base URL, e.g. ftp://host:2121/
  std::string address;
  std::string username;
  std::string password;
  /// Prefix prepended to every remote path.
  std::string base_path;
};

/// put/list/mtime over one endpoint. Not shared between threads.
class TransferClient {
 public:
  virtual ~TransferClient() = default;
  /// Uploads under a temp name, then renames, so list/mtime never see partial files.
  virtual void put_file(const std::filesystem::path& local, const std::string& remote) = 0;
  /// Completed files directly inside the remote directory `prefix`.
  virtual std::vector<RemoteEntry> list(const std::string& prefix) = 0;
  /// Throws TransferError(read) if the file does not exist.
  virtual Timestamp mtime(const std::string& remote) = 0;
  /// Explicit reachability probe.
  virtual bool reachable() = 0;
};

/// Filesystem-backed endpoint. mtime is stamped from the injected clock so simulated
/// runs see simulated ages; a re-upload never moves a path's mtime backwards.
class LocalDirClient final : public TransferClient {
 public:
  struct Hooks {
    /// Called after each chunk written to the temp file; throw to simulate a killed upload.
    std::function<void(std::uint64_t bytes_so_far)> on_chunk;
  };

  LocalDirClient(std::filesystem::path root, const Clock& clock, Hooks hooks = {});

  void put_file(const std::filesystem::path& local, const std::string& remote) override;
  std::vector<RemoteEntry> list(const std::string& prefix) override;
  Timestamp mtime(const std::string& remote) override;
  bool reachable() override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path resolve(const std::string& remote) const;

  std::filesystem::path root_;
  const Clock& clock_;
  Hooks hooks_;
};

/// FTP backend over libcurl: STOR to a temp name + RNFR/RNTO, NLST, MDTM.
class FtpClient final : public TransferClient {
 public:
  explicit FtpClient(TransferEndpoint endpoint);
  ~FtpClient() override;
  FtpClient(const FtpClient&) = delete;
  FtpClient& operator=(const FtpClient&) = delete;

  void put_file(const std::filesystem::path& local, const std::string& remote) override;
  std::vector<RemoteEntry> list(const std::string& prefix) override;
  Timestamp mtime(const std::string& remote) override;
  bool reachable() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Decorator used for fault injection: when blocked, every verb fails in the connect phase.
class GatedClient final : public TransferClient {
 public:
  GatedClient(TransferClient& inner, const std::atomic<bool>& blocked) : inner_(inner), blocked_(blocked) {}

  void put_file(const std::filesystem::path& local, const std::string& remote) override;
  std::vector<RemoteEntry> list(const std::string& prefix) override;
  Timestamp mtime(const std::string& remote) override;
  bool reachable() override;

  std::uint64_t attempts() const { return attempts_; }

 private:
  void check();
  TransferClient& inner_;
  const std::atomic<bool>& blocked_;
  std::uint64_t attempts_ = 0;
};

/// Builds the client for an endpoint; `clock` is used by the local-dir backend.
std::unique_ptr<TransferClient> make_transfer_client(const TransferEndpoint& endpoint, const Clock& clock);

/// Joins remote path segments with '/', dropping empty ones.
std::string remote_join(const std::string& a, const std::string& b);

}  // namespace specmon
