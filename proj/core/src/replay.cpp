#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"
#include "specmon/sim.hpp"
#include "specmon/sweep_io.hpp"

namespace specmon {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> sweep_files(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("replay: not a directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& rel : list_files_recursive(root)) {
    if (is_temp_name(rel)) continue;
    if (rel.filename().string().ends_with(kSweepExt)) out.push_back(root / rel);
  }
  return out;
}

std::string site_for(const fs::path& file, const std::string& given) {
  if (!given.empty()) return given;
  for (const auto& e : fs::directory_iterator(file.parent_path())) {
    if (e.path().filename().string().ends_with(kParamsSuffix)) {
      try {
        return read_params(e.path()).site_id;
      } catch (const ParseError&) {
      }
    }
  }
  return {};
}

}  // namespace

std::vector<Sweep> replay_source(const fs::path& root, const std::string& site_id) {
  std::vector<Sweep> out;
  for (const auto& f : sweep_files(root)) {
    auto sweeps = read_minute_file(f, site_for(f, site_id));
    if (!out.empty() && !sweeps.empty() && sweeps.front().start_time < out.back().start_time) {
      throw FileParseError(f.string(), "sweeps out of order relative to the previous file");
    }
    std::move(sweeps.begin(), sweeps.end(), std::back_inserter(out));
  }
  return out;
}

ReplaySource::ReplaySource(const fs::path& root, std::string site_id)
    : files_(sweep_files(root)), site_id_(std::move(site_id)) {}

std::optional<Sweep> ReplaySource::next(Timestamp) {
  while (pending_.empty() && next_file_ < files_.size()) {
    const auto& f = files_[next_file_++];
    auto sweeps = read_minute_file(f, site_for(f, site_id_));
    pending_.assign(std::make_move_iterator(sweeps.begin()), std::make_move_iterator(sweeps.end()));
  }
  if (pending_.empty()) return std::nullopt;
  Sweep s = std::move(pending_.front());
  pending_.pop_front();
  return s;
}

}  // namespace specmon
