#include "specmon/collector.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

#include "specmon/archive.hpp"
#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/measure.hpp"
#include "specmon/sweep_io.hpp"

namespace specmon {

namespace fs = std::filesystem;

std::string_view to_string(IngestStatus s) {
  switch (s) {
    case IngestStatus::ingested: return "ingested";
    case IngestStatus::missing: return "missing";
    case IngestStatus::integrity_error: return "integrity_error";
    case IngestStatus::analysis_error: return "analysis_error";
  }
  return "unknown";
}

std::vector<AURecord> analyze_day_dir(const fs::path& dir, const SiteRecord& site, std::size_t* hours_out,
                                      std::size_t* channels_out) {
  const auto listing = scan_day_dir(dir);
  std::set<Timestamp> hours;
  for (const auto& [minute, path] : listing.manifests) hours.insert(floor_hour(minute));

  std::vector<AURecord> out;
  std::size_t channels = 0;
  for (const auto hour : hours) {
    const auto pit = listing.params.find(hour);
    if (pit == listing.params.end()) {
      throw IntegrityError("no capture parameters for hour " + format_rfc3339(hour) + " in " + dir.string());
    }
    const auto params = read_params(pit->second);
    if (params.site_id != site.site_id) {
      throw IntegrityError(pit->second.string() + ": site_id '" + params.site_id + "' does not match '" +
                           site.site_id + "'");
    }
    const auto grid = build_channel_grid(params.freq_start_hz, params.freq_stop_hz, site.channel_width_hz);
    channels = std::max(channels, grid.size());

    std::vector<AuAccumulator> accs;
    std::vector<double> per_bin;
    for (const double ref : site.thresholds_dbm) {
      AuContext ctx;
      ctx.site_id = site.site_id;
      ctx.hour_start = hour;
      ctx.grid = grid;
      ctx.sweep_time_s = params.sweep_time_s;
      ctx.gate_threshold_dbm = params.gate_threshold_dbm;
      ctx.analysis_threshold_dbm = scale_threshold(ThresholdSpec{ref, static_cast<double>(kReferenceBandwidth)},
                                                   params.rbw_hz);
      ctx.threshold_ref_dbm = ref;
      ctx.min_coverage_fraction = site.min_coverage;
      per_bin.push_back(ctx.analysis_threshold_dbm);
      accs.emplace_back(std::move(ctx));
    }

    for (auto it = listing.manifests.lower_bound(hour); it != listing.manifests.end() && it->first < hour + kHour;
         ++it) {
      const auto manifest = read_manifest(it->second, it->first);
      for (auto& a : accs) a.add_manifest(manifest);
      const auto dit = listing.data_files.find(it->first);
      if (dit == listing.data_files.end()) continue;
      for (const auto& sweep : read_minute_file(dit->second, site.site_id)) {
        for (std::size_t k = 0; k < accs.size(); ++k) {
          accs[k].add_occupancy(sweep.start_time, sweep_occupancy(sweep, grid, per_bin[k]));
        }
      }
    }
    for (const auto& a : accs) {
      auto rows = a.finish();
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
  if (hours_out) *hours_out = hours.size();
  if (channels_out) *channels_out = channels;
  return out;
}

Collector::Collector(CollectorConfig config, Store& store, AlertSink alerts)
    : config_(std::move(config)), store_(store), alerts_(std::move(alerts)) {
  if (config_.inbox_root.empty() || config_.long_term_root.empty() || config_.work_root.empty()) {
    throw InvalidArgument("collector: inbox_root, long_term_root and work_root must be set");
  }
  if (config_.quarantine_root.empty()) config_.quarantine_root = config_.work_root / "quarantine";
  if (config_.ingest_hour < 0 || config_.ingest_hour > 23) throw InvalidArgument("ingest_hour: must be in 0..23");
}

std::mutex& Collector::site_mutex(const std::string& site_id) {
  std::lock_guard lock(map_mu_);
  auto& m = site_mu_[site_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

void Collector::alert(const std::string& site_id, FailureType type, const std::string& message) {
  spdlog::error("collector {}: {}", site_id, message);
  if (alerts_) alerts_(site_id, type, message);
}

fs::path Collector::move_to_long_term(const fs::path& archive, const std::string& site_id) {
  const auto dir = long_term_dir(site_id);
  fs::create_directories(dir);
  const auto target = dir / archive.filename();
  const auto tmp = temp_sibling(target);
  // Copy first so the archive exists in one of the two places at every instant.
  fs::copy_file(archive, tmp, fs::copy_options::overwrite_existing);
  fs::last_write_time(tmp, fs::last_write_time(archive));
  fs::rename(tmp, target);
  fs::remove(archive);
  return target;
}

void Collector::write_csv(const std::string& site_id, CivilDate day, const std::vector<AURecord>& rows) {
  std::string text = "site_id,channel_start_hz,channel_stop_hz,hour_start,threshold_ref_dbm,au_percent,"
                     "occupied_sweeps,total_sweeps,complete\n";
  for (const auto& r : rows) {
    text += r.site_id + "," + std::to_string(r.channel_start_hz) + "," + std::to_string(r.channel_stop_hz) + "," +
            format_rfc3339(r.hour_start) + "," + std::to_string(r.threshold_ref_dbm) + "," +
            (r.au_percent ? std::to_string(*r.au_percent) : std::string()) + "," +
            std::to_string(r.occupied_sweeps) + "," + std::to_string(r.total_sweeps) + "," +
            (r.complete ? "1" : "0") + "\n";
  }
  fs::create_directories(*config_.csv_dir);
  write_file_atomic(*config_.csv_dir / (site_id + "_" + format_day_key(day) + ".csv"), text);
}

IngestReport Collector::ingest_daily(const std::string& site_id, CivilDate day) {
  std::lock_guard site_lock(site_mutex(site_id));
  IngestReport report;
  report.site_id = site_id;
  report.day = day;

  const auto name = archive_name(site_id, day);
  auto archive = inbox_dir(site_id) / name;
  if (!fs::exists(archive)) {
    archive = long_term_dir(site_id) / name;
    if (!fs::exists(archive)) {
      report.status = IngestStatus::missing;
      report.message = "no archive " + name + " in inbox or long-term storage";
      return report;
    }
    report.from_long_term = true;
  }

  const auto site = store_.site(site_id);
  if (!site) {
    report.status = IngestStatus::analysis_error;
    report.message = "site " + site_id + " is not registered";
    return report;
  }

  const auto work = config_.work_root / site_id / format_day_key(day);
  std::error_code ec;
  fs::remove_all(work, ec);
  fs::create_directories(work.parent_path());

  try {
    decompress(archive, work);
  } catch (const IntegrityError& e) {
    report.status = IngestStatus::integrity_error;
    report.message = e.what();
    const auto qdir = config_.quarantine_root / site_id;
    fs::create_directories(qdir);
    move_file(archive, qdir / name);
    alert(site_id, FailureType::archive_missing, "archive " + name + " failed integrity check: " + e.what());
    return report;
  }

  std::vector<AURecord> rows;
  try {
    rows = analyze_day_dir(work, *site, &report.hours, &report.channels);
    store_.replace_site_range(site_id, utc_midnight(day), utc_midnight(next_day(day)), rows);
  } catch (const std::exception& e) {
    fs::remove_all(work, ec);
    report.status = IngestStatus::analysis_error;
    report.message = e.what();
    spdlog::error("collector {}: analysis of {} failed: {}", site_id, name, e.what());
    return report;
  }
  fs::remove_all(work, ec);
  report.rows = rows.size();
  report.status = IngestStatus::ingested;
  if (config_.csv_dir) write_csv(site_id, day, rows);

  if (!report.from_long_term) {
    try {
      move_to_long_term(archive, site_id);
    } catch (const std::exception& e) {
      report.long_term_error = e.what();
      alert(site_id, FailureType::archive_missing, "cannot move " + name + " to long-term storage: " + e.what());
    }
  }
  spdlog::info("collector {}: ingested {} ({} rows, {} hours)", site_id, format_day_key(day), report.rows,
               report.hours);
  return report;
}

std::vector<IngestReport> Collector::run_all() {
  std::vector<std::pair<std::string, CivilDate>> todo;
  std::error_code ec;
  if (fs::is_directory(config_.inbox_root, ec)) {
    for (const auto& site_dir : fs::directory_iterator(config_.inbox_root)) {
      if (!site_dir.is_directory()) continue;
      for (const auto& e : fs::directory_iterator(site_dir.path())) {
        std::string site;
        CivilDate day;
        if (!e.is_regular_file() || is_temp_name(e.path())) continue;
        if (!parse_archive_name(e.path().filename().string(), site, day)) continue;
        if (site != site_dir.path().filename().string()) continue;
        todo.emplace_back(site, day);
      }
    }
  }
  std::sort(todo.begin(), todo.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  std::vector<IngestReport> out;
  for (const auto& [site, day] : todo) out.push_back(ingest_daily(site, day));
  return out;
}

}  // namespace specmon
