#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gridprobe/imaging/grid.hpp"

namespace gridprobe::harness {

struct DeclaredRequirements {
  bool role_assumption = false;
  bool matrix_decomposition = false;
  bool contrastive_output = false;

  friend bool operator==(const DeclaredRequirements&, const DeclaredRequirements&) = default;
};

/// Inductive prompt template. The body must contain {CELLS}; {ROLE} and
/// {OUTPUT_CONSTRAINT} are filled from the optional fields or dropped.
struct PromptTemplate {
  static constexpr std::string_view kCells = "{CELLS}";
  static constexpr std::string_view kRole = "{ROLE}";
  static constexpr std::string_view kOutputConstraint = "{OUTPUT_CONSTRAINT}";

  std::string template_id;
  std::string language_tag;
  std::string body;
  std::optional<std::string> role;
  std::optional<std::string> output_constraint;
  DeclaredRequirements declared;

  /// Throws Error(kMissingPlaceholder) without {CELLS}, kInvalidArgument on empty ids.
  void validate() const;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// "a11, a13, a31, a33": the corner cells in matrix notation.
std::string canonical_corner_list();

/// Reads one template object. All three declared_requirements flags must be
/// present booleans.
PromptTemplate template_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PromptTemplate& t);

using TemplateSet = std::map<std::string, PromptTemplate, std::less<>>;

/// Line-delimited template objects keyed by template_id. Errors carry the line.
TemplateSet parse_templates(std::string_view text, const std::string& source = "templates");
TemplateSet load_templates(const std::string& path);

/// Substitutes placeholders, then collapses runs of spaces and tabs and trims
/// each line. Throws Error(kInvalidArgument) if the result is empty.
std::string render_prompt(const PromptTemplate& t, const imaging::CompositeLayout& layout);

}  // namespace gridprobe::harness
