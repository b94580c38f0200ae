#pragma once

#include <cstdio>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridprobe::harness {

/// Append-only NDJSON event log with a single writer. Each append is one
/// flushed line, so a crash can at worst leave a torn final line, which
/// read() skips.
class Journal {
 public:
  /// Opens for append, creating the file. A torn tail from an earlier crash
  /// is truncated first so new events start on a clean line.
  explicit Journal(std::string path);
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  void append(const nlohmann::json& event);
  const std::string& path() const noexcept { return path_; }

  /// All complete events. Throws Error(kParse) on a malformed line that is
  /// not the last one.
  static std::vector<nlohmann::json> read(const std::string& path);

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
  std::mutex mu_;
};

}  // namespace gridprobe::harness
