#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specmon/time.hpp"

namespace specmon {

using Hz = std::int64_t;

constexpr Hz kDefaultChannelWidth = 5'000'000;
constexpr Hz kReferenceBandwidth = 20'000'000;
constexpr double kDefaultReferencePower = -72.0;
constexpr double kDefaultMinCoverage = 0.9;

struct Bin {
  Hz freq_hz = 0;
  double power_dbm = 0.0;

  friend bool operator==(const Bin&, const Bin&) = default;
};

/// One scan pass over the monitored span.
struct Sweep {
  std::string site_id;
  Timestamp start_time{};
  std::vector<Bin> bins;

  friend bool operator==(const Sweep&, const Sweep&) = default;
};

/// Throws InvalidArgument if bins are unsorted, unevenly spaced or non-finite.
void validate_sweep(const Sweep& sweep);

/// Capture metadata recorded hourly alongside the sweep data.
struct SiteParams {
  std::string site_id;
  Hz freq_start_hz = 0;
  Hz freq_stop_hz = 0;
  double rbw_hz = 0.0;
  double sweep_time_s = 1.0;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string antenna_type;
  std::string lna_type;
  std::string timezone = "UTC";
  double gate_threshold_dbm = -90.0;

  friend bool operator==(const SiteParams&, const SiteParams&) = default;
};

void validate_site_params(const SiteParams& params);

struct Channel {
  Hz start_hz = 0;
  Hz stop_hz = 0;

  Hz width() const { return stop_hz - start_hz; }
  bool contains(Hz f) const { return start_hz <= f && f < stop_hz; }
  friend bool operator==(const Channel&, const Channel&) = default;
};

struct ChannelGrid {
  std::vector<Channel> channels;
  Hz channel_width = kDefaultChannelWidth;

  std::size_t size() const { return channels.size(); }
  /// Index of the channel containing f, if any.
  std::optional<std::size_t> index_of(Hz f) const;
  Hz span_start() const { return channels.empty() ? 0 : channels.front().start_hz; }
  Hz span_stop() const { return channels.empty() ? 0 : channels.back().stop_hz; }
};

/// Analysis threshold stated as power per reference bandwidth (dBm / 20 MHz by default).
struct ThresholdSpec {
  double ref_power_dbm = kDefaultReferencePower;
  double ref_bandwidth_hz = static_cast<double>(kReferenceBandwidth);

  friend bool operator==(const ThresholdSpec&, const ThresholdSpec&) = default;
};

struct AURecord {
  std::string site_id;
  Hz channel_start_hz = 0;
  Hz channel_stop_hz = 0;
  Timestamp hour_start{};
  /// Empty when the hour had no sweeps at all.
  std::optional<double> au_percent;
  std::int64_t occupied_sweeps = 0;
  std::int64_t total_sweeps = 0;
  double threshold_ref_dbm = kDefaultReferencePower;
  bool complete = false;

  friend bool operator==(const AURecord&, const AURecord&) = default;
};

/// Throws InvalidArgument when the record breaks the AU bounds.
void validate_au_record(const AURecord& record);

struct CalibrationPoint {
  Hz freq_hz = 0;
  double offset_db = 0.0;
};

struct CalibrationTable {
  std::vector<CalibrationPoint> points;

  /// Linear interpolation between anchors, clamped outside the table span.
  double offset_at(Hz f) const;
};

void validate_calibration(const CalibrationTable& table);

/// Sweep counts for one UTC minute; stored <= total.
struct MinuteManifest {
  Timestamp minute_start{};
  std::int64_t total_sweeps = 0;
  std::int64_t stored_sweeps = 0;

  friend bool operator==(const MinuteManifest&, const MinuteManifest&) = default;
};

}  // namespace specmon
