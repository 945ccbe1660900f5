#include "specmon/fsutil.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "specmon/error.hpp"

namespace specmon {

namespace fs = std::filesystem;

namespace {
constexpr std::string_view kTempPrefix = ".tmp.";
std::atomic<std::uint64_t> g_temp_counter{0};
}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

fs::path temp_sibling(const fs::path& path) {
  const auto n = g_temp_counter.fetch_add(1);
  return path.parent_path() /
         (std::string(kTempPrefix) + std::to_string(::getpid()) + "." + std::to_string(n) + "." +
          path.filename().string());
}

bool is_temp_name(const fs::path& path) { return path.filename().string().starts_with(kTempPrefix); }

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed: " + path.string());
  }
}

std::vector<fs::path> list_files_recursive(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.generic_string() < b.generic_string();
  });
  return out;
}

fs::file_time_type to_file_time(Timestamp t) {
  return std::chrono::file_clock::from_sys(std::chrono::time_point_cast<std::chrono::system_clock::duration>(t));
}

Timestamp from_file_time(fs::file_time_type t) {
  return std::chrono::time_point_cast<Micros>(std::chrono::file_clock::to_sys(t));
}

void move_file(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::rename(from, to, ec);
  if (!ec) return;
  if (ec != std::errc::cross_device_link) throw fs::filesystem_error("move failed", from, to, ec);
  const auto mtime = fs::last_write_time(from);
  const auto tmp = temp_sibling(to);
  fs::copy_file(from, tmp, fs::copy_options::overwrite_existing);
  fs::last_write_time(tmp, mtime);
  fs::rename(tmp, to);
  fs::remove(from);
}

}  // namespace specmon
