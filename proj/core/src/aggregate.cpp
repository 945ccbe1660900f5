#include "specmon/aggregate.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "specmon/error.hpp"

namespace specmon {

namespace {

constexpr std::array kGraphTypes = {
    GraphType::airtime_utilization, GraphType::hour_of_day, GraphType::heatmap_mean,
    GraphType::heatmap_max,         GraphType::min_max_mean, GraphType::weekly_mean,
};

struct Cell {
  double sum = 0.0;
  double max = 0.0;
  double min = 0.0;
  std::int64_t n = 0;

  void add(double v) {
    if (n == 0) {
      min = max = v;
    } else {
      min = std::min(min, v);
      max = std::max(max, v);
    }
    sum += v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
};

struct ChannelKey {
  Hz start = 0;
  Hz stop = 0;
  auto operator<=>(const ChannelKey&) const = default;
};

}  // namespace

std::string_view to_string(GraphType type) {
  switch (type) {
    case GraphType::airtime_utilization: return "airtime-utilization";
    case GraphType::hour_of_day: return "hour-of-day";
    case GraphType::heatmap_mean: return "heatmap-mean";
    case GraphType::heatmap_max: return "heatmap-max";
    case GraphType::min_max_mean: return "min-max-mean";
    case GraphType::weekly_mean: return "weekly-mean";
  }
  return "unknown";
}

GraphType parse_graph_type(std::string_view name) {
  for (auto t : kGraphTypes) {
    if (to_string(t) == name) return t;
  }
  throw InvalidArgument("unknown graph type '" + std::string(name) + "'");
}

std::span<const GraphType> all_graph_types() { return kGraphTypes; }

std::string_view to_string(AxisKind kind) {
  switch (kind) {
    case AxisKind::hour_start_utc: return "hour_start_utc";
    case AxisKind::local_hour: return "local_hour";
    case AxisKind::weekday: return "weekday";
    case AxisKind::statistic: return "statistic";
  }
  return "unknown";
}

SeriesData aggregate_series(std::span<const AURecord> records, GraphType type, const TimeZone& site_tz) {
  if (records.empty()) throw InvalidArgument("aggregate_series: no records");
  const auto& first = records.front();
  for (const auto& r : records) {
    if (r.site_id != first.site_id) throw InvalidArgument("aggregate_series: records span several sites");
    if (r.threshold_ref_dbm != first.threshold_ref_dbm) {
      throw InvalidArgument("aggregate_series: records span several thresholds");
    }
  }

  SeriesData out;
  out.graph_type = type;
  out.site_id = first.site_id;
  out.timezone = site_tz.name();
  out.threshold_ref_dbm = first.threshold_ref_dbm;

  // channel -> column -> cell
  std::map<ChannelKey, std::map<std::int64_t, Cell>> cells;
  for (const auto& r : records) {
    if (!r.au_percent) continue;
    // The raw heatmap shows every measured hour; the statistics use complete hours only.
    if (!r.complete && type != GraphType::airtime_utilization) continue;
    std::int64_t column = 0;
    switch (type) {
      case GraphType::airtime_utilization: column = to_unix_us(r.hour_start); break;
      case GraphType::hour_of_day:
      case GraphType::heatmap_mean:
      case GraphType::heatmap_max: column = site_tz.local_hour(r.hour_start); break;
      case GraphType::weekly_mean: column = site_tz.local_weekday(r.hour_start); break;
      case GraphType::min_max_mean: column = 0; break;
    }
    cells[ChannelKey{r.channel_start_hz, r.channel_stop_hz}][column].add(*r.au_percent);
  }
  if (cells.empty()) return out;

  switch (type) {
    case GraphType::airtime_utilization: {
      out.axis = AxisKind::hour_start_utc;
      std::vector<std::int64_t> hours;
      for (const auto& [ch, row] : cells) {
        for (const auto& [h, cell] : row) hours.push_back(h);
      }
      std::sort(hours.begin(), hours.end());
      hours.erase(std::unique(hours.begin(), hours.end()), hours.end());
      out.columns = std::move(hours);
      break;
    }
    case GraphType::hour_of_day:
    case GraphType::heatmap_mean:
    case GraphType::heatmap_max:
      out.axis = AxisKind::local_hour;
      for (int h = 0; h < 24; ++h) out.columns.push_back(h);
      break;
    case GraphType::weekly_mean:
      out.axis = AxisKind::weekday;
      for (int d = 0; d < 7; ++d) out.columns.push_back(d);
      break;
    case GraphType::min_max_mean:
      out.axis = AxisKind::statistic;
      out.columns = {0, 1, 2};
      break;
  }

  for (const auto& [ch, row] : cells) {
    out.channels.push_back(Channel{ch.start, ch.stop});
    std::vector<std::optional<double>> values(out.columns.size());
    if (type == GraphType::min_max_mean) {
      const auto& cell = row.begin()->second;
      values = {cell.min, cell.max, cell.mean()};
    } else {
      for (std::size_t i = 0; i < out.columns.size(); ++i) {
        auto it = row.find(out.columns[i]);
        if (it == row.end()) continue;
        values[i] = type == GraphType::heatmap_max ? it->second.max : it->second.mean();
      }
    }
    out.values.push_back(std::move(values));
  }
  return out;
}

std::optional<double> median_au(std::span<const AURecord> records) {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.complete && r.au_percent) v.push_back(*r.au_percent);
  }
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace specmon
