#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "specmon/time.hpp"

namespace specmon {

inline constexpr std::string_view kArchiveExt = ".lzma-archive";

struct ArchiveHandle {
  std::filesystem::path path;
  std::string site_id;
  CivilDate day{};
  std::uint64_t uncompressed_bytes = 0;
  std::uint64_t compressed_bytes = 0;

  double ratio() const {
    return compressed_bytes == 0 ? 0.0 : static_cast<double>(uncompressed_bytes) / static_cast<double>(compressed_bytes);
  }
};

/// "<site_id>_<YYYYMMDD>.lzma-archive"
std::string archive_name(const std::string& site_id, CivilDate day);
/// Inverse of archive_name; false if the name does not match.
bool parse_archive_name(const std::string& name, std::string& site_id, CivilDate& day);

/// Packs every file and directory under `dir` (relative paths, lexicographic order) into
/// one xz/LZMA2 stream at `out`. level in 1..9. The archive is written under a temp name
/// and renamed, so a failure leaves no partial archive.
ArchiveHandle compress_dir(const std::filesystem::path& dir, const std::filesystem::path& out, int level = 9);

/// Restores the tree into `dest` (which must not exist). On any integrity failure throws
/// IntegrityError and leaves `dest` absent.
void decompress(const std::filesystem::path& archive, const std::filesystem::path& dest);

}  // namespace specmon
