#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "specmon/time.hpp"

namespace specmon {

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Regular files under root, relative paths, lexicographically sorted.
std::vector<std::filesystem::path> list_files_recursive(const std::filesystem::path& root);
/// Unique sibling temp name used for write-then-rename.
std::filesystem::path temp_sibling(const std::filesystem::path& path);
bool is_temp_name(const std::filesystem::path& path);

std::filesystem::file_time_type to_file_time(Timestamp t);
Timestamp from_file_time(std::filesystem::file_time_type t);
/// Moves a file, falling back to copy + remove across filesystems. The mtime is kept.
void move_file(const std::filesystem::path& from, const std::filesystem::path& to);

}  // namespace specmon
