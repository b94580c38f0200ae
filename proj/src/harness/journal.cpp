#include "gridprobe/harness/journal.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridprobe/common/error.hpp"

namespace gridprobe::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Length of the prefix ending at the last newline.
std::uintmax_t clean_prefix_length(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto last = content.rfind('\n');
  return last == std::string::npos ? 0 : last + 1;
}

}  // namespace

Journal::Journal(std::string path) : path_(std::move(path)) {
  if (const auto parent = fs::path(path_).parent_path(); !parent.empty()) fs::create_directories(parent);
  if (fs::exists(path_)) {
    const auto keep = clean_prefix_length(path_);
    if (keep != fs::file_size(path_)) fs::resize_file(path_, keep);
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw Error(ErrorCode::kIo, "cannot open journal " + path_);
}

Journal::~Journal() {
  if (file_) std::fclose(file_);
}

void Journal::append(const json& event) {
  const std::string line = event.dump() + "\n";
  std::lock_guard lock(mu_);
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
    throw Error(ErrorCode::kIo, "journal write failed: " + path_);
  }
}

std::vector<json> Journal::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read journal " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<json> events;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < content.size()) {
    const auto end = content.find('\n', start);
    ++line_no;
    if (end == std::string::npos) break;  // torn tail
    const std::string_view line(content.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    json event = json::parse(line, nullptr, false);
    if (event.is_discarded()) {
      throw Error(ErrorCode::kParse, path + " line " + std::to_string(line_no) + ": malformed event");
    }
    events.push_back(std::move(event));
  }
  return events;
}

}  // namespace gridprobe::harness
