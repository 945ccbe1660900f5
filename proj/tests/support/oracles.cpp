#include "oracles.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace specmon::testing {

namespace fs = std::filesystem;

std::vector<OracleAu> brute_force_au(const std::vector<OracleChannel>& channels, const std::vector<OracleSweep>& sweeps,
                                     const std::vector<OracleMinute>& minutes, double per_bin_threshold,
                                     double sweep_time_s, double min_coverage) {
  std::int64_t total = 0;
  for (const auto& m : minutes) total += m.total;
  std::vector<OracleAu> out;
  for (const auto& ch : channels) {
    OracleAu r;
    r.total = total;
    for (const auto& s : sweeps) {
      bool hit = false;
      for (const auto& [f, p] : s.bins) {
        if (f >= ch.start && f < ch.stop && p > per_bin_threshold) hit = true;
      }
      if (hit) r.occupied += 1;
    }
    r.has_au = total > 0;
    if (r.has_au) r.au = 100.0 * static_cast<double>(r.occupied) / static_cast<double>(total);
    r.complete = total > 0 && static_cast<double>(total) >= min_coverage * (3600.0 / sweep_time_s);
    out.push_back(r);
  }
  return out;
}

double oracle_scaled_threshold(double ref_dbm, double ref_bw_hz, double bin_bw_hz) {
  const double ref_mw = std::pow(10.0, ref_dbm / 10.0);
  const double density = ref_mw / ref_bw_hz;
  return 10.0 * std::log10(density * bin_bw_hz);
}

std::pair<double, double> oracle_binomial_interval(std::int64_t n, double p, double confidence) {
  if (p <= 0.0) return {0.0, 0.0};
  if (p >= 1.0) return {100.0, 100.0};
  const double tail = (1.0 - confidence) / 2.0;
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  double lp = static_cast<double>(n) * std::log(1.0 - p);
  const double odds = std::log(p / (1.0 - p));
  for (std::int64_t k = 0; k <= n; ++k) {
    pmf[static_cast<std::size_t>(k)] = std::exp(lp);
    lp += std::log(static_cast<double>(n - k) / static_cast<double>(k + 1)) + odds;
  }
  std::int64_t lo = 0;
  double acc = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    acc += pmf[static_cast<std::size_t>(k)];
    if (acc >= tail) {
      lo = k;
      break;
    }
  }
  std::int64_t hi = n;
  acc = 0.0;
  for (std::int64_t k = n; k >= 0; --k) {
    acc += pmf[static_cast<std::size_t>(k)];
    if (acc >= tail) {
      hi = k;
      break;
    }
  }
  return {100.0 * static_cast<double>(lo) / static_cast<double>(n), 100.0 * static_cast<double>(hi) / static_cast<double>(n)};
}

std::map<std::string, std::string> tree_snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (e.is_directory()) {
      out[rel] = "<dir>";
    } else {
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      out[rel] = ss.str();
    }
  }
  return out;
}

std::size_t make_random_tree(const fs::path& root, std::mt19937_64& rng) {
  fs::create_directories(root);
  std::uniform_int_distribution<int> n_dirs(0, 4), n_files(0, 6), len_kind(0, 5), byte(0, 255), depth_d(0, 3);
  std::size_t files = 0;
  std::vector<fs::path> dirs{root};
  const int nd = n_dirs(rng);
  for (int i = 0; i < nd; ++i) {
    auto parent = dirs[std::uniform_int_distribution<std::size_t>(0, dirs.size() - 1)(rng)];
    auto d = parent / ("d" + std::to_string(i) + (depth_d(rng) == 0 ? " with space" : ""));
    fs::create_directories(d);
    dirs.push_back(d);
  }
  for (const auto& d : dirs) {
    const int nf = n_files(rng);
    for (int i = 0; i < nf; ++i) {
      std::string name = "f" + std::to_string(i);
      if (i % 3 == 1) name += ".sweeps";
      std::string content;
      switch (len_kind(rng)) {
        case 0: break;  // empty file
        case 1: content.assign(1, static_cast<char>(byte(rng))); break;
        case 2:
          for (int k = 0; k < 4096; ++k) content.push_back(static_cast<char>(byte(rng)));
          break;
        case 3: content.assign(70'000, 'a'); break;
        default: {
          const int n = std::uniform_int_distribution<int>(1, 20'000)(rng);
          for (int k = 0; k < n; ++k) content.push_back("0123456789,.-\n"[byte(rng) % 14]);
        }
      }
      std::ofstream(d / name, std::ios::binary) << content;
      ++files;
    }
  }
  return files;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("specmon-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace specmon::testing
