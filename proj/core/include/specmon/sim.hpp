#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specmon/model.hpp"

namespace specmon {

/// A transmitter with a flat in-band power and an hourly activity schedule.
struct BandProfile {
  Hz center_hz = 0;
  Hz bandwidth_hz = 0;
  double active_power_dbm = -60.0;
  /// Probability of being active during a sweep, indexed by local hour.
  std::array<double, 24> activity{};
  /// Days (Monday first) on which the activity table applies; other days are silent.
  std::array<bool, 7> weekdays{true, true, true, true, true, true, true};

  Hz low_hz() const { return center_hz - bandwidth_hz / 2; }
  Hz high_hz() const { return center_hz + bandwidth_hz / 2; }
  bool covers(Hz f) const { return low_hz() <= f && f < high_hz(); }

  static BandProfile constant(Hz center, Hz bandwidth, double power_dbm, double probability);
};

struct Environment {
  std::string site_id = "sim";
  Hz freq_start_hz = 0;
  Hz freq_stop_hz = 20'000'000;
  double rbw_hz = 1'000'000.0;
  double noise_floor_dbm = -100.0;
  double noise_sigma_db = 0.0;
  std::vector<BandProfile> bands;
  std::uint64_t seed = 1;
  double sweep_time_s = 1.0;
  /// Zone in which the activity tables are read.
  TimeZone timezone = TimeZone::utc();
};

/// Throws InvalidArgument naming the offending field.
void validate_environment(const Environment& env);

/// Bin centre frequencies: freq_start + rbw/2 + i*rbw for every whole bin in the span.
std::vector<Hz> bin_frequencies(const Environment& env);

/// Activity probability of band `band` for the sweep starting at t.
double activity_probability(const Environment& env, std::size_t band, Timestamp t);
bool band_active(const Environment& env, std::size_t band, Timestamp t);

/// Pure function of (env, t). Powers are representable as float32 so the stored
/// form round-trips exactly.
Sweep generate_sweep(const Environment& env, Timestamp t);

/// Analytic AU (percent) of `channel` for the local-hour schedule in force at hour_start.
/// 0 for a channel no band reaches. Throws UnsupportedConfiguration when several bands cover
/// the channel or the threshold does not separate the band from the noise.
double expected_au(const Environment& env, const Channel& channel, Timestamp hour_start,
                   double per_bin_threshold_dbm);

/// Declarative environment file (JSON). Errors name the offending key and the source.
Environment parse_environment(std::string_view json_text, std::string_view source_name = "<inline>");
Environment load_environment(const std::filesystem::path& path);

class SweepSource {
 public:
  virtual ~SweepSource() = default;
  /// Next sweep, stamped at or after `now`; nullopt when the source is exhausted.
  virtual std::optional<Sweep> next(Timestamp now) = 0;
};

class SimulatedSource final : public SweepSource {
 public:
  explicit SimulatedSource(Environment env) : env_(std::move(env)) {}
  std::optional<Sweep> next(Timestamp now) override { return generate_sweep(env_, now); }
  const Environment& environment() const { return env_; }

 private:
  Environment env_;
};

/// Sweeps previously written by the site agent, in timestamp order.
/// `root` may be a data directory (containing YYYYMMDD/ folders) or one day folder.
/// Throws FileParseError naming the first malformed file.
std::vector<Sweep> replay_source(const std::filesystem::path& root, const std::string& site_id = "");

/// Streaming replay; one file is parsed at a time.
class ReplaySource final : public SweepSource {
 public:
  explicit ReplaySource(const std::filesystem::path& root, std::string site_id = "");
  std::optional<Sweep> next(Timestamp now) override;

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t next_file_ = 0;
  std::deque<Sweep> pending_;
  std::string site_id_;
};

}  // namespace specmon
