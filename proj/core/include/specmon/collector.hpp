#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "specmon/model.hpp"
#include "specmon/ops.hpp"
#include "specmon/store.hpp"

namespace specmon {

struct CollectorConfig {
  /// Directory the transfer endpoint writes into; archives arrive under <inbox>/<site_id>/.
  std::filesystem::path inbox_root;
  /// <long_term_root>/<site_id>/ keeps every ingested archive.
  std::filesystem::path long_term_root;
  /// Scratch space for decompressed days; removed after each ingest.
  std::filesystem::path work_root;
  /// Archives that failed the integrity check end up in <quarantine>/<site_id>/.
  std::filesystem::path quarantine_root;
  /// When set, the rows of each ingest are also written to <csv_dir>/<site>_<YYYYMMDD>.csv.
  std::optional<std::filesystem::path> csv_dir;
  /// Local hour (site zone) of the scheduled ingest.
  int ingest_hour = 3;
};

enum class IngestStatus { ingested, missing, integrity_error, analysis_error };
std::string_view to_string(IngestStatus status);

struct IngestReport {
  std::string site_id;
  CivilDate day{};
  IngestStatus status = IngestStatus::missing;
  std::size_t rows = 0;
  std::size_t hours = 0;
  std::size_t channels = 0;
  /// True when the archive was found already in long-term storage (re-ingest).
  bool from_long_term = false;
  /// Empty on success; otherwise why the archive stayed in the inbox.
  std::string long_term_error;
  std::string message;
};

/// Receives integrity and storage problems; normally the ops monitor.
using AlertSink = std::function<void(const std::string& site_id, FailureType type, const std::string& message)>;

/// Decodes one restored day folder into AU rows for every hour that has a manifest.
/// Throws on malformed data; nothing is persisted by this function.
std::vector<AURecord> analyze_day_dir(const std::filesystem::path& dir, const SiteRecord& site,
                                      std::size_t* hours_out = nullptr, std::size_t* channels_out = nullptr);

class Collector {
 public:
  Collector(CollectorConfig config, Store& store, AlertSink alerts = {});

  const CollectorConfig& config() const { return config_; }

  IngestReport ingest_daily(const std::string& site_id, CivilDate day);
  /// Ingests every archive currently in the inbox, oldest day first.
  std::vector<IngestReport> run_all();
  /// Copies the archive to long-term storage, then removes it from the inbox.
  std::filesystem::path move_to_long_term(const std::filesystem::path& archive, const std::string& site_id);

  std::filesystem::path inbox_dir(const std::string& site_id) const { return config_.inbox_root / site_id; }
  std::filesystem::path long_term_dir(const std::string& site_id) const { return config_.long_term_root / site_id; }

 private:
  std::mutex& site_mutex(const std::string& site_id);
  void alert(const std::string& site_id, FailureType type, const std::string& message);
  void write_csv(const std::string& site_id, CivilDate day, const std::vector<AURecord>& rows);

  CollectorConfig config_;
  Store& store_;
  AlertSink alerts_;
  std::mutex map_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> site_mu_;
};

}  // namespace specmon
