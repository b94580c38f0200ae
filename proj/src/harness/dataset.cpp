#include "gridprobe/harness/dataset.hpp"

#include <filesystem>
#include <json.hpp>
#include <set>
#include <sstream>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"

namespace gridprobe::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).string();
}

// Calls fn(record, fail) for every non-blank line.
template <class Fn>
void for_each_record(std::string_view text, const std::string& source, Fn&& fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why, ErrorCode code = ErrorCode::kParse) {
      return Error(code, source + " line " + std::to_string(line_no) + ": " + why);
    };
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) throw fail("not a JSON object");
    fn(record, fail);
  }
}

std::string string_field(const json& record, const char* key) {
  auto it = record.find(key);
  return it != record.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

bool is_valid_case_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::vector<CaseSpec> parse_dataset(std::string_view text, const std::string& base_dir, const std::string& source) {
  std::vector<CaseSpec> cases;
  std::set<std::string> seen;
  for_each_record(text, source, [&](const json& record, auto& fail) {
    CaseSpec spec;
    spec.case_id = string_field(record, "case_id");
    if (!is_valid_case_id(spec.case_id)) throw fail("case_id missing or not in [A-Za-z0-9._-]", ErrorCode::kInvalidArgument);
    spec.category = string_field(record, "category");
    spec.prompt_template_id = string_field(record, "prompt_template_id");
    if (spec.prompt_template_id.empty()) throw fail("case '" + spec.case_id + "' needs prompt_template_id", ErrorCode::kInvalidArgument);

    const bool has_prompt = record.contains("prompt");
    const bool has_image = record.contains("image_path");
    if (has_prompt == has_image) {
      throw fail("case '" + spec.case_id + "' must have exactly one of prompt or image_path", ErrorCode::kInvalidArgument);
    }
    if (has_prompt) {
      auto prompt = string_field(record, "prompt");
      if (prompt.empty()) throw fail("case '" + spec.case_id + "' has an empty prompt", ErrorCode::kInvalidArgument);
      spec.guidance = PromptGuidance{std::move(prompt)};
    } else {
      auto path = string_field(record, "image_path");
      if (path.empty()) throw fail("case '" + spec.case_id + "' has an empty image_path", ErrorCode::kInvalidArgument);
      spec.guidance = ImageGuidance{resolve(base_dir, path)};
    }

    if (record.contains("trials")) {
      const auto& trials = record["trials"];
      if (!trials.is_number_integer() || trials.get<long long>() < 1) {
        throw fail("case '" + spec.case_id + "' trials must be an integer >= 1", ErrorCode::kInvalidArgument);
      }
      spec.trials = trials.get<int>();
    }
    if (!seen.insert(spec.case_id).second) throw fail("duplicate case_id '" + spec.case_id + "'", ErrorCode::kDuplicateId);
    cases.push_back(std::move(spec));
  });
  return cases;
}

std::vector<CaseSpec> ingest_dataset(const std::string& path) {
  return parse_dataset(read_file_text(path), fs::path(path).parent_path().string(), path);
}

std::vector<PoolEntry> parse_pool_manifest(std::string_view text, const std::string& base_dir,
                                           const std::string& source) {
  std::vector<PoolEntry> entries;
  std::set<std::string> seen;
  for_each_record(text, source, [&](const json& record, auto& fail) {
    PoolEntry entry{string_field(record, "id"), string_field(record, "path"), string_field(record, "label")};
    if (entry.id.empty() || entry.path.empty()) throw fail("pool entries need id and path", ErrorCode::kInvalidArgument);
    if (!seen.insert(entry.id).second) throw fail("duplicate pool id '" + entry.id + "'", ErrorCode::kDuplicateId);
    entry.path = resolve(base_dir, entry.path);
    entries.push_back(std::move(entry));
  });
  return entries;
}

std::vector<PoolEntry> load_pool_manifest(const std::string& path) {
  return parse_pool_manifest(read_file_text(path), fs::path(path).parent_path().string(), path);
}

}  // namespace gridprobe::harness
