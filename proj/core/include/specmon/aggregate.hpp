#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specmon/model.hpp"

namespace specmon {

enum class GraphType {
  airtime_utilization,
  hour_of_day,
  heatmap_mean,
  heatmap_max,
  min_max_mean,
  weekly_mean,
};

/// Wire names: "airtime-utilization", "hour-of-day", ...
std::string_view to_string(GraphType type);
/// Throws InvalidArgument for unknown names.
GraphType parse_graph_type(std::string_view name);
std::span<const GraphType> all_graph_types();

/// What the columns of SeriesData::values index.
enum class AxisKind { hour_start_utc, local_hour, weekday, statistic };
std::string_view to_string(AxisKind kind);

/// Channel-major matrix: values[channel][column]; nullopt where no record contributed.
struct SeriesData {
  GraphType graph_type = GraphType::airtime_utilization;
  std::string site_id;
  std::string timezone;
  double threshold_ref_dbm = kDefaultReferencePower;
  std::vector<Channel> channels;
  AxisKind axis = AxisKind::hour_start_utc;
  /// Column labels: UTC hour starts (µs) for airtime-utilization, 0..23, 0..6 (Monday first),
  /// or 0,1,2 for min/max/mean.
  std::vector<std::int64_t> columns;
  std::vector<std::vector<std::optional<double>>> values;

  bool empty() const { return channels.empty(); }
};

/// Records must belong to one site and one threshold. Incomplete records appear only in
/// the airtime-utilization matrix; records with no AU never appear.
SeriesData aggregate_series(std::span<const AURecord> records, GraphType type, const TimeZone& site_tz);

/// Median AU of the complete records for one channel; nullopt if there are none.
std::optional<double> median_au(std::span<const AURecord> records);

}  // namespace specmon
