#include "specmon/measure.hpp"

#include <cmath>

#include "specmon/error.hpp"

namespace specmon {

double scale_threshold(const ThresholdSpec& spec, double bin_bandwidth_hz) {
  if (!(bin_bandwidth_hz > 0.0) || !std::isfinite(bin_bandwidth_hz)) {
    throw InvalidArgument("scale_threshold: bin bandwidth must be positive");
  }
  if (!(spec.ref_bandwidth_hz > 0.0)) {
    throw InvalidArgument("scale_threshold: reference bandwidth must be positive");
  }
  return spec.ref_power_dbm + 10.0 * std::log10(bin_bandwidth_hz / spec.ref_bandwidth_hz);
}

ChannelGrid build_channel_grid(Hz freq_start, Hz freq_stop, Hz width) {
  if (!(freq_start < freq_stop)) throw InvalidArgument("build_channel_grid: freq_start must be < freq_stop");
  if (width <= 0) throw InvalidArgument("build_channel_grid: width must be positive");
  ChannelGrid grid;
  grid.channel_width = width;
  for (Hz lo = freq_start; lo < freq_stop; lo += width) {
    grid.channels.push_back(Channel{lo, std::min(lo + width, freq_stop)});
  }
  return grid;
}

Sweep apply_calibration(const Sweep& sweep, const CalibrationTable& table) {
  validate_calibration(table);
  Sweep out = sweep;
  for (auto& bin : out.bins) bin.power_dbm += table.offset_at(bin.freq_hz);
  return out;
}

Occupancy sweep_occupancy(const Sweep& sweep, const ChannelGrid& grid, double per_bin_threshold_dbm) {
  Occupancy occ(grid.size(), false);
  std::size_t c = 0;
  for (const auto& bin : sweep.bins) {
    while (c < grid.size() && bin.freq_hz >= grid.channels[c].stop_hz) ++c;
    if (c == grid.size()) break;
    if (bin.freq_hz < grid.channels[c].start_hz) continue;
    if (bin.power_dbm > per_bin_threshold_dbm) occ[c] = true;
  }
  return occ;
}

bool any_bin_above(const Sweep& sweep, double threshold_dbm) {
  for (const auto& bin : sweep.bins) {
    if (bin.power_dbm > threshold_dbm) return true;
  }
  return false;
}

double expected_sweeps_per_hour(double sweep_time_s) {
  if (!(sweep_time_s > 0.0)) throw InvalidArgument("sweep_time must be positive");
  return 3600.0 / sweep_time_s;
}

AuAccumulator::AuAccumulator(AuContext ctx) : ctx_(std::move(ctx)), occupied_(ctx_.grid.size(), 0) {
  if (ctx_.gate_threshold_dbm > ctx_.analysis_threshold_dbm) {
    throw GateViolation("gate threshold " + std::to_string(ctx_.gate_threshold_dbm) +
                        " dBm exceeds analysis threshold " + std::to_string(ctx_.analysis_threshold_dbm) +
                        " dBm; suppressed sweeps could hide occupancy");
  }
  if (ctx_.hour_start != floor_hour(ctx_.hour_start)) {
    throw InvalidArgument("compute_au: hour_start is not on an hour boundary");
  }
  expected_sweeps_per_hour(ctx_.sweep_time_s);
}

void AuAccumulator::check_in_hour(Timestamp t, const char* what) const {
  if (t < ctx_.hour_start || t >= ctx_.hour_start + kHour) {
    throw InvalidArgument(std::string("compute_au: ") + what + " at " + format_rfc3339(t) + " outside hour " +
                          format_rfc3339(ctx_.hour_start));
  }
}

void AuAccumulator::add_manifest(const MinuteManifest& m) {
  check_in_hour(m.minute_start, "manifest");
  if (m.total_sweeps < 0 || m.stored_sweeps < 0 || m.stored_sweeps > m.total_sweeps) {
    throw InvalidArgument("compute_au: manifest with stored > total or negative counts");
  }
  total_ += m.total_sweeps;
  manifest_stored_ += m.stored_sweeps;
}

void AuAccumulator::add_occupancy(Timestamp time, const Occupancy& channels) {
  check_in_hour(time, "sweep");
  if (channels.size() != occupied_.size()) {
    throw InvalidArgument("compute_au: occupancy vector does not match the channel grid");
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c]) ++occupied_[c];
  }
  ++stored_seen_;
}

std::vector<AURecord> AuAccumulator::finish() const {
  if (stored_seen_ != manifest_stored_) {
    throw InvalidArgument("compute_au: " + std::to_string(stored_seen_) + " stored sweeps but manifests report " +
                          std::to_string(manifest_stored_));
  }
  const bool complete =
      total_ > 0 && static_cast<double>(total_) >= ctx_.min_coverage_fraction * expected_sweeps_per_hour(ctx_.sweep_time_s);
  std::vector<AURecord> out;
  out.reserve(occupied_.size());
  for (std::size_t c = 0; c < occupied_.size(); ++c) {
    AURecord r;
    r.site_id = ctx_.site_id;
    r.channel_start_hz = ctx_.grid.channels[c].start_hz;
    r.channel_stop_hz = ctx_.grid.channels[c].stop_hz;
    r.hour_start = ctx_.hour_start;
    r.occupied_sweeps = occupied_[c];
    r.total_sweeps = total_;
    r.threshold_ref_dbm = ctx_.threshold_ref_dbm;
    r.complete = complete;
    if (total_ > 0) r.au_percent = 100.0 * static_cast<double>(occupied_[c]) / static_cast<double>(total_);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AURecord> compute_au(std::span<const TimedOccupancy> stream, std::span<const MinuteManifest> manifests,
                                 const AuContext& ctx) {
  AuAccumulator acc(ctx);
  for (const auto& m : manifests) acc.add_manifest(m);
  for (const auto& o : stream) acc.add_occupancy(o.time, o.channels);
  return acc.finish();
}

}  // namespace specmon
