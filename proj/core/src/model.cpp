#include "specmon/model.hpp"

#include <algorithm>
#include <cmath>

#include "specmon/error.hpp"

namespace specmon {

void validate_sweep(const Sweep& sweep) {
  const auto& bins = sweep.bins;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!std::isfinite(bins[i].power_dbm)) {
      throw InvalidArgument("sweep: non-finite power at bin " + std::to_string(i));
    }
    if (i > 0 && bins[i].freq_hz <= bins[i - 1].freq_hz) {
      throw InvalidArgument("sweep: bins not strictly ascending at bin " + std::to_string(i));
    }
  }
  if (bins.size() > 2) {
    const Hz step = bins[1].freq_hz - bins[0].freq_hz;
    for (std::size_t i = 2; i < bins.size(); ++i) {
      // integer rounding of the bin grid allows 1 Hz of jitter
      if (std::llabs((bins[i].freq_hz - bins[i - 1].freq_hz) - step) > 1) {
        throw InvalidArgument("sweep: non-uniform bin spacing at bin " + std::to_string(i));
      }
    }
  }
}

void validate_site_params(const SiteParams& p) {
  if (p.site_id.empty()) throw InvalidArgument("site params: site_id is required");
  if (!(p.freq_start_hz < p.freq_stop_hz)) throw InvalidArgument("site params: freq_start must be < freq_stop");
  if (!(p.rbw_hz > 0)) throw InvalidArgument("site params: rbw must be > 0");
  if (!(p.sweep_time_s > 0)) throw InvalidArgument("site params: sweep_time must be > 0");
  if (!is_resolvable_timezone(p.timezone)) {
    throw InvalidArgument("site params: unresolvable timezone '" + p.timezone + "'");
  }
}

std::optional<std::size_t> ChannelGrid::index_of(Hz f) const {
  if (channels.empty() || f < channels.front().start_hz || f >= channels.back().stop_hz) return std::nullopt;
  auto it = std::upper_bound(channels.begin(), channels.end(), f,
                             [](Hz v, const Channel& c) { return v < c.start_hz; });
  --it;
  if (!it->contains(f)) return std::nullopt;
  return static_cast<std::size_t>(it - channels.begin());
}

void validate_au_record(const AURecord& r) {
  if (r.total_sweeps < 0 || r.occupied_sweeps < 0) throw InvalidArgument("AU record: negative sweep count");
  if (r.occupied_sweeps > r.total_sweeps) throw InvalidArgument("AU record: occupied exceeds total");
  if (r.au_percent) {
    if (!(*r.au_percent >= 0.0 && *r.au_percent <= 100.0)) throw InvalidArgument("AU record: au out of [0,100]");
    if (r.total_sweeps == 0) throw InvalidArgument("AU record: au present with zero total");
  } else if (r.total_sweeps > 0) {
    throw InvalidArgument("AU record: au missing with nonzero total");
  }
  if (!(r.channel_start_hz < r.channel_stop_hz)) throw InvalidArgument("AU record: empty channel");
}

double CalibrationTable::offset_at(Hz f) const {
  if (points.empty()) throw InvalidArgument("calibration table is empty");
  if (f <= points.front().freq_hz) return points.front().offset_db;
  if (f >= points.back().freq_hz) return points.back().offset_db;
  auto hi = std::upper_bound(points.begin(), points.end(), f,
                             [](Hz v, const CalibrationPoint& p) { return v < p.freq_hz; });
  auto lo = hi - 1;
  const double t = static_cast<double>(f - lo->freq_hz) / static_cast<double>(hi->freq_hz - lo->freq_hz);
  return lo->offset_db + t * (hi->offset_db - lo->offset_db);
}

void validate_calibration(const CalibrationTable& table) {
  if (table.points.empty()) throw InvalidArgument("calibration table is empty");
  for (std::size_t i = 0; i < table.points.size(); ++i) {
    if (!std::isfinite(table.points[i].offset_db)) throw InvalidArgument("calibration: non-finite offset");
    if (i > 0 && table.points[i].freq_hz <= table.points[i - 1].freq_hz) {
      throw InvalidArgument("calibration: anchor frequencies must be strictly ascending");
    }
  }
}

}  // namespace specmon
