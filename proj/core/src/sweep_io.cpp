#include "specmon/sweep_io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <system_error>

#include "json_reader.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"

namespace specmon {

namespace fs = std::filesystem;

fs::path day_dir(const fs::path& data_dir, CivilDate day) { return data_dir / format_day_key(day); }

fs::path minute_data_path(const fs::path& data_dir, Timestamp minute) {
  return day_dir(data_dir, utc_date(minute)) / (format_minute_key(minute) + std::string(kSweepExt));
}

fs::path manifest_path(const fs::path& data_dir, Timestamp minute) {
  return day_dir(data_dir, utc_date(minute)) / (format_minute_key(minute) + std::string(kManifestExt));
}

fs::path params_path(const fs::path& data_dir, Timestamp hour) {
  return day_dir(data_dir, utc_date(hour)) / (format_hour_key(hour) + std::string(kParamsSuffix));
}

void append_sweep_rows(std::string& out, const Sweep& sweep) {
  char buf[96];
  const auto ts = to_unix_us(sweep.start_time);
  for (const auto& bin : sweep.bins) {
    char* p = buf;
    // one byte kept back for each separator
    char* end = buf + sizeof buf - 1;
    p = std::to_chars(p, end, ts).ptr;
    *p++ = ',';
    p = std::to_chars(p, end, bin.freq_hz).ptr;
    *p++ = ',';
    p = std::to_chars(p, end, static_cast<float>(bin.power_dbm)).ptr;
    *p++ = '\n';
    out.append(buf, p);
  }
}

MinuteFileWriter::MinuteFileWriter(const fs::path& path) : path_(path) {
  fs::create_directories(path.parent_path());
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw IoError("cannot create minute file " + path.string());
  buffer_.append(kSweepFileHeader);
  buffer_.push_back('\n');
}

MinuteFileWriter::MinuteFileWriter(MinuteFileWriter&& other) noexcept
    : path_(std::move(other.path_)), file_(std::exchange(other.file_, nullptr)), buffer_(std::move(other.buffer_)) {}

MinuteFileWriter& MinuteFileWriter::operator=(MinuteFileWriter&& other) noexcept {
  if (this != &other) {
    try {
      close();
    } catch (...) {
    }
    path_ = std::move(other.path_);
    file_ = std::exchange(other.file_, nullptr);
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

MinuteFileWriter::~MinuteFileWriter() {
  try {
    close();
  } catch (...) {
  }
}

void MinuteFileWriter::append(const Sweep& sweep) {
  if (!file_) throw IoError("minute file is not open");
  append_sweep_rows(buffer_, sweep);
  if (buffer_.size() >= (1u << 16)) {
    const auto n = std::fwrite(buffer_.data(), 1, buffer_.size(), file_);
    const bool ok = n == buffer_.size();
    buffer_.clear();
    if (!ok) throw IoError("write failed: " + path_.string());
  }
}

void MinuteFileWriter::close() {
  if (!file_) return;
  std::FILE* f = std::exchange(file_, nullptr);
  bool ok = std::fwrite(buffer_.data(), 1, buffer_.size(), f) == buffer_.size();
  buffer_.clear();
  ok = (std::fclose(f) == 0) && ok;
  if (!ok) throw IoError("write failed: " + path_.string());
}

namespace {

template <typename T>
T parse_field(std::string_view field, const std::string& source, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || p != field.data() + field.size()) {
    throw FileParseError(source, "line " + std::to_string(line) + ": bad field '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::vector<Sweep> parse_minute_data(std::string_view text, const std::string& source, const std::string& site_id) {
  std::vector<Sweep> sweeps;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      throw FileParseError(source, "truncated final line " + std::to_string(line_no + 1));
    }
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!header) {
      if (line != kSweepFileHeader) throw FileParseError(source, "missing or wrong header");
      header = true;
      continue;
    }
    auto c1 = line.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw FileParseError(source, "line " + std::to_string(line_no) + ": expected 3 columns");
    }
    const auto ts = parse_field<std::int64_t>(line.substr(0, c1), source, line_no);
    const auto f = parse_field<Hz>(line.substr(c1 + 1, c2 - c1 - 1), source, line_no);
    const auto p = parse_field<float>(line.substr(c2 + 1), source, line_no);
    if (!std::isfinite(p)) throw FileParseError(source, "line " + std::to_string(line_no) + ": non-finite power");
    if (sweeps.empty() || to_unix_us(sweeps.back().start_time) != ts) {
      if (!sweeps.empty() && to_unix_us(sweeps.back().start_time) > ts) {
        throw FileParseError(source, "line " + std::to_string(line_no) + ": timestamps not ascending");
      }
      sweeps.push_back(Sweep{site_id, from_unix_us(ts), {}});
    }
    auto& bins = sweeps.back().bins;
    if (!bins.empty() && bins.back().freq_hz >= f) {
      throw FileParseError(source, "line " + std::to_string(line_no) + ": frequencies not ascending");
    }
    bins.push_back(Bin{f, static_cast<double>(p)});
  }
  if (!header) throw FileParseError(source, "empty file (no header)");
  return sweeps;
}

std::vector<Sweep> read_minute_file(const fs::path& path, const std::string& site_id) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw FileParseError(path.string(), e.what());
  }
  return parse_minute_data(text, path.string(), site_id);
}

void write_manifest(const fs::path& path, const MinuteManifest& m) {
  write_file_atomic(path, std::to_string(m.total_sweeps) + " " + std::to_string(m.stored_sweeps) + "\n");
}

MinuteManifest read_manifest(const fs::path& path, Timestamp minute_start) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw FileParseError(path.string(), e.what());
  }
  MinuteManifest m;
  m.minute_start = minute_start;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  auto r1 = std::from_chars(p, end, m.total_sweeps);
  if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != ' ') throw FileParseError(path.string(), "bad manifest");
  auto r2 = std::from_chars(r1.ptr + 1, end, m.stored_sweeps);
  if (r2.ec != std::errc{} || std::string_view(r2.ptr, end) != "\n") throw FileParseError(path.string(), "bad manifest");
  if (m.total_sweeps < 0 || m.stored_sweeps < 0 || m.stored_sweeps > m.total_sweeps) {
    throw FileParseError(path.string(), "manifest counts violate stored <= total");
  }
  return m;
}

std::string params_to_json(const SiteParams& p) {
  nlohmann::ordered_json j;
  j["site_id"] = p.site_id;
  j["freq_start_hz"] = p.freq_start_hz;
  j["freq_stop_hz"] = p.freq_stop_hz;
  j["rbw_hz"] = p.rbw_hz;
  j["sweep_time_s"] = p.sweep_time_s;
  j["latitude"] = p.latitude;
  j["longitude"] = p.longitude;
  j["antenna_type"] = p.antenna_type;
  j["lna_type"] = p.lna_type;
  j["timezone"] = p.timezone;
  j["gate_threshold_dbm"] = p.gate_threshold_dbm;
  return j.dump(2) + "\n";
}

SiteParams params_from_json(std::string_view text, const std::string& source) {
  auto doc = detail::parse_json_text(text, source);
  detail::ObjectReader r(doc, source);
  SiteParams p;
  p.site_id = r.get<std::string>("site_id");
  p.freq_start_hz = r.get<Hz>("freq_start_hz");
  p.freq_stop_hz = r.get<Hz>("freq_stop_hz");
  p.rbw_hz = r.get<double>("rbw_hz");
  p.sweep_time_s = r.get<double>("sweep_time_s");
  p.latitude = r.get<double>("latitude");
  p.longitude = r.get<double>("longitude");
  p.antenna_type = r.get<std::string>("antenna_type");
  p.lna_type = r.get<std::string>("lna_type");
  p.timezone = r.get<std::string>("timezone");
  p.gate_threshold_dbm = r.get<double>("gate_threshold_dbm");
  r.finish();
  return p;
}

void write_params(const fs::path& path, const SiteParams& params) { write_file_atomic(path, params_to_json(params)); }

SiteParams read_params(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw FileParseError(path.string(), e.what());
  }
  return params_from_json(text, path.string());
}

namespace {

std::optional<int> digits(std::string_view s) {
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

DayListing scan_day_dir(const fs::path& dir) {
  DayListing listing;
  listing.day = parse_date(dir.filename().string());
  const auto midnight = utc_midnight(listing.day);
  if (!fs::exists(dir)) return listing;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (is_temp_name(e.path())) continue;
    auto minute_of = [&](std::string_view stem) -> std::optional<Timestamp> {
      if (stem.size() != 4) return std::nullopt;
      auto hh = digits(stem.substr(0, 2));
      auto mm = digits(stem.substr(2, 2));
      if (!hh || !mm || *hh > 23 || *mm > 59) return std::nullopt;
      return midnight + std::chrono::hours{*hh} + std::chrono::minutes{*mm};
    };
    if (name.ends_with(kSweepExt)) {
      if (auto t = minute_of(std::string_view(name).substr(0, name.size() - kSweepExt.size()))) listing.data_files[*t] = e.path();
    } else if (name.ends_with(kManifestExt)) {
      if (auto t = minute_of(std::string_view(name).substr(0, name.size() - kManifestExt.size()))) listing.manifests[*t] = e.path();
    } else if (name.ends_with(kParamsSuffix) && name.size() == 2 + kParamsSuffix.size()) {
      if (auto hh = digits(std::string_view(name).substr(0, 2)); hh && *hh <= 23) {
        listing.params[midnight + std::chrono::hours{*hh}] = e.path();
      }
    }
  }
  return listing;
}

std::vector<CivilDate> list_day_dirs(const fs::path& data_dir) {
  std::vector<CivilDate> out;
  if (!fs::exists(data_dir)) return out;
  for (const auto& e : fs::directory_iterator(data_dir)) {
    if (!e.is_directory()) continue;
    const auto name = e.path().filename().string();
    if (name.size() != 8 || !digits(name)) continue;
    try {
      out.push_back(parse_date(name));
    } catch (const ParseError&) {
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specmon
