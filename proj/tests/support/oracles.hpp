#pragma once

// Reference implementations used only by tests. They share no code with core/ beyond
// the plain data types, so agreement is evidence rather than tautology.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "specmon/model.hpp"

namespace specmon::testing {

struct OracleChannel {
  Hz start = 0;
  Hz stop = 0;
};

struct OracleSweep {
  std::int64_t t_us = 0;
  std::vector<std::pair<Hz, double>> bins;
};

struct OracleMinute {
  std::int64_t minute_us = 0;
  std::int64_t total = 0;
  std::int64_t stored = 0;
};

struct OracleAu {
  std::int64_t occupied = 0;
  std::int64_t total = 0;
  bool has_au = false;
  double au = 0.0;
  bool complete = false;
};

/// Triple loop: channels x stored sweeps x bins. Denominator from the minute counts.
std::vector<OracleAu> brute_force_au(const std::vector<OracleChannel>& channels, const std::vector<OracleSweep>& sweeps,
                                     const std::vector<OracleMinute>& minutes, double per_bin_threshold,
                                     double sweep_time_s, double min_coverage);

/// Power-density scaling computed from first principles in linear milliwatts.
double oracle_scaled_threshold(double ref_dbm, double ref_bw_hz, double bin_bw_hz);

/// Central acceptance interval of Binomial(n, p) with equal tail mass (1-conf)/2 on each side,
/// in percent. The pmf is built by the multiplicative recurrence rather than lgamma.
std::pair<double, double> oracle_binomial_interval(std::int64_t n, double p, double confidence);

/// Relative path -> content ("<dir>" for directories) of every entry below root.
std::map<std::string, std::string> tree_snapshot(const std::filesystem::path& root);

/// Populates `root` with a random tree of files and folders. Returns the file count.
std::size_t make_random_tree(const std::filesystem::path& root, std::mt19937_64& rng);

/// Self-deleting scratch directory.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace specmon::testing
