#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gridprobe::harness {

struct PromptGuidance {
  std::string prompt;
  friend bool operator==(const PromptGuidance&, const PromptGuidance&) = default;
};

struct ImageGuidance {
  std::string image_path;  // resolved against the dataset file's directory
  friend bool operator==(const ImageGuidance&, const ImageGuidance&) = default;
};

struct CaseSpec {
  std::string case_id;
  std::string category;
  std::variant<PromptGuidance, ImageGuidance> guidance;
  std::string prompt_template_id;
  int trials = 1;

  friend bool operator==(const CaseSpec&, const CaseSpec&) = default;
};

/// Case ids become directory names, so they are limited to [A-Za-z0-9._-]
/// and may not start with '.'.
bool is_valid_case_id(std::string_view id);

/// One JSON object per line:
///   {"case_id", "category", "prompt" | "image_path", "prompt_template_id", "trials"?}
/// `trials` defaults to 1. Errors carry the line number.
std::vector<CaseSpec> parse_dataset(std::string_view text, const std::string& base_dir,
                                    const std::string& source = "dataset");
std::vector<CaseSpec> ingest_dataset(const std::string& path);

struct PoolEntry {
  std::string id;
  std::string path;  // resolved
  std::string label;
};

/// Neutral pool manifest, one {"id", "path", "label"?} object per line.
std::vector<PoolEntry> parse_pool_manifest(std::string_view text, const std::string& base_dir,
                                           const std::string& source = "pool");
std::vector<PoolEntry> load_pool_manifest(const std::string& path);

}  // namespace gridprobe::harness
