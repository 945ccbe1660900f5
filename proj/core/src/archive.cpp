#include "specmon/archive.hpp"

#include <lzma.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "specmon/error.hpp"
#include "specmon/fsutil.hpp"

namespace specmon {

namespace fs = std::filesystem;

// Container inside the xz stream:
//   magic "SMARCH1\n"
//   entries: kind u8 ('D' | 'F'), path_len u32le, path, [size u64le, bytes] for 'F'
//   trailer: 'E', entry_count u64le
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'M', 'A', 'R', 'C', 'H', '1', '\n'};
constexpr std::size_t kChunk = 1 << 16;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

class XzWriter {
 public:
  XzWriter(std::FILE* out, int level) : out_(out) {
    if (lzma_easy_encoder(&strm_, static_cast<std::uint32_t>(level), LZMA_CHECK_CRC64) != LZMA_OK) {
      throw IoError("lzma encoder init failed");
    }
  }
  ~XzWriter() { lzma_end(&strm_); }
  XzWriter(const XzWriter&) = delete;
  XzWriter& operator=(const XzWriter&) = delete;

  void write(const void* data, std::size_t n) {
    strm_.next_in = static_cast<const std::uint8_t*>(data);
    strm_.avail_in = n;
    while (strm_.avail_in > 0) pump(LZMA_RUN);
  }
  void finish() {
    while (pump(LZMA_FINISH) != LZMA_STREAM_END) {
    }
  }

 private:
  lzma_ret pump(lzma_action action) {
    strm_.next_out = buf_.data();
    strm_.avail_out = buf_.size();
    const lzma_ret ret = lzma_code(&strm_, action);
    if (ret != LZMA_OK && ret != LZMA_STREAM_END) throw IoError("lzma encode failed (" + std::to_string(ret) + ")");
    const std::size_t n = buf_.size() - strm_.avail_out;
    if (n > 0 && std::fwrite(buf_.data(), 1, n, out_) != n) throw IoError("archive write failed");
    return ret;
  }

  lzma_stream strm_ = LZMA_STREAM_INIT;
  std::FILE* out_;
  std::array<std::uint8_t, kChunk> buf_{};
};

class XzReader {
 public:
  explicit XzReader(std::FILE* in) : in_(in) {
    if (lzma_stream_decoder(&strm_, UINT64_MAX, 0) != LZMA_OK) throw IoError("lzma decoder init failed");
  }
  ~XzReader() { lzma_end(&strm_); }
  XzReader(const XzReader&) = delete;
  XzReader& operator=(const XzReader&) = delete;

  void read_exact(void* dst, std::size_t n) {
    strm_.next_out = static_cast<std::uint8_t*>(dst);
    strm_.avail_out = n;
    while (strm_.avail_out > 0) {
      if (ended_) throw IntegrityError("archive truncated");
      step(LZMA_RUN);
    }
  }

  /// Requires the xz stream to end exactly here (its checks verified) with no trailing bytes.
  void expect_end() {
    std::uint8_t extra = 0;
    strm_.next_out = &extra;
    strm_.avail_out = 1;
    while (!ended_) {
      step(feof_ ? LZMA_FINISH : LZMA_RUN);
      if (strm_.avail_out == 0) throw IntegrityError("trailing data after archive trailer");
    }
    if (strm_.avail_in != 0 || std::fgetc(in_) != EOF) throw IntegrityError("trailing bytes after xz stream");
  }

 private:
  void step(lzma_action action) {
    if (strm_.avail_in == 0 && !feof_) {
      const auto n = std::fread(inbuf_.data(), 1, inbuf_.size(), in_);
      if (std::ferror(in_)) throw IoError("archive read failed");
      if (n == 0) feof_ = true;
      strm_.next_in = inbuf_.data();
      strm_.avail_in = n;
    }
    if (feof_ && strm_.avail_in == 0) action = LZMA_FINISH;
    const lzma_ret ret = lzma_code(&strm_, action);
    if (ret == LZMA_STREAM_END) {
      ended_ = true;
      return;
    }
    if (ret == LZMA_BUF_ERROR && feof_) throw IntegrityError("archive truncated");
    if (ret != LZMA_OK) throw IntegrityError("archive corrupt (lzma error " + std::to_string(ret) + ")");
  }

  lzma_stream strm_ = LZMA_STREAM_INIT;
  std::FILE* in_;
  std::array<std::uint8_t, kChunk> inbuf_{};
  bool feof_ = false;
  bool ended_ = false;
};

void put_u32(XzWriter& w, std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  w.write(b, 4);
}

void put_u64(XzWriter& w, std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  w.write(b, 8);
}

std::uint32_t get_u32(XzReader& r) {
  std::uint8_t b[4];
  r.read_exact(b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(XzReader& r) {
  std::uint8_t b[8];
  r.read_exact(b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

bool safe_relative(const fs::path& p) {
  if (p.empty() || p.is_absolute()) return false;
  for (const auto& part : p) {
    if (part == ".." || part == ".") return false;
  }
  return true;
}

}  // namespace

std::string archive_name(const std::string& site_id, CivilDate day) {
  return site_id + "_" + format_day_key(day) + std::string(kArchiveExt);
}

bool parse_archive_name(const std::string& name, std::string& site_id, CivilDate& day) {
  if (!name.ends_with(kArchiveExt) || name.starts_with('.')) return false;
  const auto stem = name.substr(0, name.size() - kArchiveExt.size());
  const auto us = stem.rfind('_');
  if (us == std::string::npos || us == 0 || stem.size() - us - 1 != 8) return false;
  try {
    day = parse_date(stem.substr(us + 1));
  } catch (const ParseError&) {
    return false;
  }
  site_id = stem.substr(0, us);
  return true;
}

ArchiveHandle compress_dir(const fs::path& dir, const fs::path& out, int level) {
  if (level < 1 || level > 9) throw InvalidArgument("compress_dir: level must be in 1..9");
  if (!fs::is_directory(dir)) throw IoError("compress_dir: not a directory: " + dir.string());

  std::vector<std::pair<fs::path, bool>> entries;  // (relative path, is_dir)
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_directory()) {
      entries.emplace_back(fs::relative(e.path(), dir), true);
    } else if (e.is_regular_file()) {
      entries.emplace_back(fs::relative(e.path(), dir), false);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first.generic_string() < b.first.generic_string(); });

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const auto tmp = temp_sibling(out);
  ArchiveHandle handle;
  handle.path = out;
  try {
    {
      FilePtr f(std::fopen(tmp.c_str(), "wb"));
      if (!f) throw IoError("cannot create " + tmp.string());
      XzWriter w(f.get(), level);
      w.write(kMagic.data(), kMagic.size());
      std::vector<char> buf(kChunk);
      for (const auto& [rel, is_dir] : entries) {
        const auto name = rel.generic_string();
        const char kind = is_dir ? 'D' : 'F';
        w.write(&kind, 1);
        put_u32(w, static_cast<std::uint32_t>(name.size()));
        w.write(name.data(), name.size());
        if (is_dir) continue;
        FilePtr in(std::fopen((dir / rel).c_str(), "rb"));
        if (!in) throw IoError("compress_dir: cannot read " + (dir / rel).string());
        const auto size = fs::file_size(dir / rel);
        put_u64(w, size);
        std::uint64_t copied = 0;
        while (copied < size) {
          const auto want = static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), size - copied));
          const auto got = std::fread(buf.data(), 1, want, in.get());
          if (got != want) throw IoError("compress_dir: short read on " + (dir / rel).string());
          w.write(buf.data(), got);
          copied += got;
        }
        handle.uncompressed_bytes += size;
      }
      const char end = 'E';
      w.write(&end, 1);
      put_u64(w, entries.size());
      w.finish();
      if (std::fflush(f.get()) != 0) throw IoError("archive flush failed");
    }
    fs::rename(tmp, out);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  handle.compressed_bytes = fs::file_size(out);
  std::string site;
  CivilDate day;
  if (parse_archive_name(out.filename().string(), site, day)) {
    handle.site_id = site;
    handle.day = day;
  }
  return handle;
}

void decompress(const fs::path& archive, const fs::path& dest) {
  if (fs::exists(dest)) throw IoError("decompress: destination exists: " + dest.string());
  FilePtr f(std::fopen(archive.c_str(), "rb"));
  if (!f) throw IoError("decompress: cannot open " + archive.string());
  if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
  const auto staging = temp_sibling(dest);
  try {
    fs::create_directories(staging);
    XzReader r(f.get());
    std::array<char, 8> magic{};
    r.read_exact(magic.data(), magic.size());
    if (magic != kMagic) throw IntegrityError("not a specmon archive: " + archive.string());
    std::vector<char> buf(kChunk);
    std::uint64_t count = 0;
    for (;;) {
      char kind = 0;
      r.read_exact(&kind, 1);
      if (kind == 'E') break;
      if (kind != 'D' && kind != 'F') throw IntegrityError("bad entry kind in " + archive.string());
      const auto len = get_u32(r);
      if (len == 0 || len > 4096) throw IntegrityError("bad entry path length");
      std::string name(len, '\0');
      r.read_exact(name.data(), len);
      const fs::path rel(name);
      if (!safe_relative(rel)) throw IntegrityError("unsafe entry path '" + name + "'");
      ++count;
      if (kind == 'D') {
        fs::create_directories(staging / rel);
        continue;
      }
      fs::create_directories((staging / rel).parent_path());
      FilePtr out(std::fopen((staging / rel).c_str(), "wb"));
      if (!out) throw IoError("decompress: cannot create " + (staging / rel).string());
      auto remaining = get_u64(r);
      while (remaining > 0) {
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), remaining));
        r.read_exact(buf.data(), n);
        if (std::fwrite(buf.data(), 1, n, out.get()) != n) throw IoError("decompress: write failed");
        remaining -= n;
      }
      if (std::fclose(out.release()) != 0) throw IoError("decompress: write failed");
    }
    if (get_u64(r) != count) throw IntegrityError("entry count mismatch in " + archive.string());
    r.expect_end();
    fs::rename(staging, dest);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace specmon
