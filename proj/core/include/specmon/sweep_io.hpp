#pragma once

// On-disk layout written by the site agent under <data_dir>:
//
//   <YYYYMMDD>/<HHMM>.sweeps        minute data, CSV: timestamp_us,freq_hz,power_dbm
//   <YYYYMMDD>/<HHMM>.manifest      "<total> <stored>\n"
//   <YYYYMMDD>/<HH>.params.json     hourly capture parameters
//
// All keys are UTC. power_dbm is a float32 written in shortest round-trip form.

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specmon/model.hpp"

namespace specmon {

inline constexpr std::string_view kSweepFileHeader = "timestamp_us,freq_hz,power_dbm";
inline constexpr std::string_view kSweepExt = ".sweeps";
inline constexpr std::string_view kManifestExt = ".manifest";
inline constexpr std::string_view kParamsSuffix = ".params.json";

std::filesystem::path day_dir(const std::filesystem::path& data_dir, CivilDate day);
std::filesystem::path minute_data_path(const std::filesystem::path& data_dir, Timestamp minute);
std::filesystem::path manifest_path(const std::filesystem::path& data_dir, Timestamp minute);
std::filesystem::path params_path(const std::filesystem::path& data_dir, Timestamp hour);

/// Appends CSV rows for one sweep.
void append_sweep_rows(std::string& out, const Sweep& sweep);

/// Buffered writer for one minute file; the header is written on open.
class MinuteFileWriter {
 public:
  MinuteFileWriter() = default;
  explicit MinuteFileWriter(const std::filesystem::path& path);
  MinuteFileWriter(MinuteFileWriter&& other) noexcept;
  MinuteFileWriter& operator=(MinuteFileWriter&& other) noexcept;
  MinuteFileWriter(const MinuteFileWriter&) = delete;
  MinuteFileWriter& operator=(const MinuteFileWriter&) = delete;
  ~MinuteFileWriter();

  bool is_open() const { return file_ != nullptr; }
  const std::filesystem::path& path() const { return path_; }
  /// Throws IoError on a failed write.
  void append(const Sweep& sweep);
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::string buffer_;
};

/// Rows grouped into sweeps by timestamp. Throws FileParseError naming the file.
std::vector<Sweep> read_minute_file(const std::filesystem::path& path, const std::string& site_id = "");
std::vector<Sweep> parse_minute_data(std::string_view text, const std::string& source, const std::string& site_id);

void write_manifest(const std::filesystem::path& path, const MinuteManifest& manifest);
MinuteManifest read_manifest(const std::filesystem::path& path, Timestamp minute_start);

/// JSON object with exactly the keys site_id, freq_start_hz, freq_stop_hz, rbw_hz,
/// sweep_time_s, latitude, longitude, antenna_type, lna_type, timezone, gate_threshold_dbm.
std::string params_to_json(const SiteParams& params);
SiteParams params_from_json(std::string_view text, const std::string& source);
void write_params(const std::filesystem::path& path, const SiteParams& params);
SiteParams read_params(const std::filesystem::path& path);

/// Contents of one UTC day folder, keyed by UTC minute / hour start.
struct DayListing {
  CivilDate day;
  std::map<Timestamp, std::filesystem::path> data_files;
  std::map<Timestamp, std::filesystem::path> manifests;
  std::map<Timestamp, std::filesystem::path> params;
};

/// Parses file names of a YYYYMMDD folder; unrelated files are ignored.
DayListing scan_day_dir(const std::filesystem::path& dir);
/// Day folders (YYYYMMDD) directly under data_dir, ascending.
std::vector<CivilDate> list_day_dirs(const std::filesystem::path& data_dir);

}  // namespace specmon
