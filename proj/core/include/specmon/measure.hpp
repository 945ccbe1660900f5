#pragma once

#include <span>
#include <string>
#include <vector>

#include "specmon/model.hpp"

namespace specmon {

/// Per-bin threshold under power-density scaling:
/// ref_power + 10 log10(bin_bandwidth / ref_bandwidth).
double scale_threshold(const ThresholdSpec& spec, double bin_bandwidth_hz);

/// Channels of `width` anchored at freq_start; the last one is truncated at freq_stop.
ChannelGrid build_channel_grid(Hz freq_start, Hz freq_stop, Hz width = kDefaultChannelWidth);

Sweep apply_calibration(const Sweep& sweep, const CalibrationTable& table);

using Occupancy = std::vector<bool>;

/// Channel c is occupied iff some bin with start <= f < stop has power strictly above the threshold.
Occupancy sweep_occupancy(const Sweep& sweep, const ChannelGrid& grid, double per_bin_threshold_dbm);

/// True iff any bin exceeds the threshold (the recording gate test).
bool any_bin_above(const Sweep& sweep, double threshold_dbm);

struct TimedOccupancy {
  Timestamp time{};
  Occupancy channels;
};

struct AuContext {
  std::string site_id;
  Timestamp hour_start{};
  ChannelGrid grid;
  double sweep_time_s = 1.0;
  double gate_threshold_dbm = -90.0;
  /// Per-bin analysis threshold, already scaled to the bin bandwidth.
  double analysis_threshold_dbm = -85.0;
  /// Reference threshold recorded on the output rows (dBm / 20 MHz).
  double threshold_ref_dbm = kDefaultReferencePower;
  double min_coverage_fraction = kDefaultMinCoverage;
};

/// Streaming form of compute_au for one (site, hour, threshold).
class AuAccumulator {
 public:
  /// Throws GateViolation if the gate sits above the analysis threshold.
  explicit AuAccumulator(AuContext ctx);

  void add_manifest(const MinuteManifest& manifest);
  void add_occupancy(Timestamp time, const Occupancy& channels);

  std::int64_t stored_seen() const { return stored_seen_; }
  std::int64_t manifest_stored() const { return manifest_stored_; }

  /// One record per channel. Throws InvalidArgument if the stored stream and the
  /// manifests disagree on the number of stored sweeps.
  std::vector<AURecord> finish() const;

 private:
  void check_in_hour(Timestamp t, const char* what) const;

  AuContext ctx_;
  std::vector<std::int64_t> occupied_;
  std::int64_t total_ = 0;
  std::int64_t manifest_stored_ = 0;
  std::int64_t stored_seen_ = 0;
};

std::vector<AURecord> compute_au(std::span<const TimedOccupancy> stream,
                                 std::span<const MinuteManifest> manifests, const AuContext& ctx);

/// Sweeps expected in an hour at the given cadence.
double expected_sweeps_per_hour(double sweep_time_s);

}  // namespace specmon
