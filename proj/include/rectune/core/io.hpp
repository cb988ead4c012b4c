#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rectune/core/error.hpp"

namespace rectune {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Canonical on-disk JSON: sorted keys (nlohmann objects are std::map backed),
// two-space indent, trailing newline.
inline std::string to_canonical_text(const json& j) { return j.dump(2) + "\n"; }

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw StorageError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

// Hook invoked after the temp file is fully written and before the rename.
// Tests use it to simulate a crash at the worst moment.
using BeforeRenameHook = std::function<void(const fs::path& tmp, const fs::path& target)>;

inline bool is_temp_file(const fs::path& p) {
  return p.filename().string().find(".tmp.") != std::string::npos;
}

// Write-to-temp, fsync, rename. Readers see either the old or the new file.
inline void atomic_write_text(const fs::path& path, const std::string& text,
                              const BeforeRenameHook& before_rename = {}) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw StorageError("cannot create '" + path.parent_path().string() + "': " + ec.message());

  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." +
                       std::to_string(counter.fetch_add(1));
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw StorageError("cannot create '" + tmp.string() + "'");
  std::size_t off = 0;
  while (off < text.size()) {
    const auto n = ::write(fd, text.data() + off, text.size() - off);
    if (n <= 0) {
      ::close(fd);
      fs::remove(tmp, ec);
      throw StorageError("short write to '" + tmp.string() + "'");
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);

  if (before_rename) before_rename(tmp, path);

  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError("cannot rename into '" + path.string() + "'");
  }
}

inline void write_json(const fs::path& path, const json& j, const BeforeRenameHook& hook = {}) {
  atomic_write_text(path, to_canonical_text(j), hook);
}

// Exclusive advisory lock (flock) held for the object's lifetime.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) : path_(path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw StorageError("cannot open lock file '" + path.string() + "'");
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw LockConflict("another writer holds '" + path.string() + "'");
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  FileLock(FileLock&& o) noexcept : path_(std::move(o.path_)), fd_(std::exchange(o.fd_, -1)) {}
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

// ---- time ----

using TimePoint = std::chrono::sys_seconds;
using Clock = std::function<TimePoint()>;

inline Clock system_clock() {
  return [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

// Deterministic clock: epoch, epoch+1s, epoch+2s, ...
inline Clock stepping_clock(std::int64_t epoch_seconds,
                            std::shared_ptr<std::int64_t> ticks = std::make_shared<std::int64_t>(0)) {
  return [epoch_seconds, ticks] {
    return TimePoint{std::chrono::seconds{epoch_seconds + (*ticks)++}};
  };
}

inline std::string format_rfc3339(TimePoint t) {
  const std::time_t tt = t.time_since_epoch().count();
  std::tm tm{};
  ::gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline TimePoint parse_rfc3339(const std::string& s) {
  std::tm tm{};
  std::istringstream in(s);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) throw ValidationError("not an RFC 3339 UTC timestamp: '" + s + "'");
  return TimePoint{std::chrono::seconds{::timegm(&tm)}};
}

}  // namespace rectune
