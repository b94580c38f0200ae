#include "gridprobe/harness/prompt_template.hpp"

#include <sstream>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"

namespace gridprobe::harness {

using nlohmann::json;

namespace {

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

std::string normalize_whitespace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  bool first = true;
  while (std::getline(in, line)) {
    std::string collapsed;
    bool in_space = false;
    for (char c : line) {
      if (c == ' ' || c == '\t' || c == '\r') {
        in_space = true;
        continue;
      }
      if (in_space && !collapsed.empty()) collapsed += ' ';
      in_space = false;
      collapsed += c;
    }
    if (!first) out += '\n';
    out += collapsed;
    first = false;
  }
  // Drop trailing empty lines.
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a string");
  return it->get<std::string>();
}

}  // namespace

void PromptTemplate::validate() const {
  if (template_id.empty()) throw Error(ErrorCode::kInvalidArgument, "template_id is empty");
  if (body.find(kCells) == std::string::npos) {
    throw Error(ErrorCode::kMissingPlaceholder, "template '" + template_id + "' body lacks {CELLS}");
  }
}

std::string canonical_corner_list() {
  std::string out;
  for (const auto& cell : imaging::kCornerCells) {
    if (!out.empty()) out += ", ";
    out += cell.label();
  }
  return out;
}

PromptTemplate template_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "template must be a JSON object");
  PromptTemplate t;
  t.template_id = optional_string(j, "template_id").value_or("");
  t.language_tag = optional_string(j, "language_tag").value_or("");
  t.body = optional_string(j, "body").value_or("");
  t.role = optional_string(j, "role");
  t.output_constraint = optional_string(j, "output_constraint");

  auto req = j.find("declared_requirements");
  if (req == j.end() || !req->is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "template '" + t.template_id + "' needs declared_requirements");
  }
  auto flag = [&](const char* key) {
    auto it = req->find(key);
    if (it == req->end() || !it->is_boolean()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template '" + t.template_id + "' must set declared_requirements." + key + " to true or false");
    }
    return it->get<bool>();
  };
  t.declared = {flag("role_assumption"), flag("matrix_decomposition"), flag("contrastive_output")};
  t.validate();
  return t;
}

json to_json(const PromptTemplate& t) {
  json j = {{"template_id", t.template_id},
            {"language_tag", t.language_tag},
            {"body", t.body},
            {"declared_requirements",
             {{"role_assumption", t.declared.role_assumption},
              {"matrix_decomposition", t.declared.matrix_decomposition},
              {"contrastive_output", t.declared.contrastive_output}}}};
  if (t.role) j["role"] = *t.role;
  if (t.output_constraint) j["output_constraint"] = *t.output_constraint;
  return j;
}

TemplateSet parse_templates(std::string_view text, const std::string& source) {
  TemplateSet set;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + " line " + std::to_string(line_no) + ": ";
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kParse, where + "not valid JSON");
    try {
      PromptTemplate t = template_from_json(j);
      const std::string id = t.template_id;
      if (!set.emplace(id, std::move(t)).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate template_id '" + id + "'");
      }
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  return set;
}

TemplateSet load_templates(const std::string& path) { return parse_templates(read_file_text(path), path); }

std::string render_prompt(const PromptTemplate& t, const imaging::CompositeLayout& layout) {
  t.validate();
  if (!layout.corners.is_bijection()) throw Error(ErrorCode::kInvalidArgument, "corner map is not a bijection");
  // The instruction always names the corner cells; where each quadrant went
  // is what the model has to work out.
  std::string text = t.body;
  replace_all(text, PromptTemplate::kCells, canonical_corner_list());
  replace_all(text, PromptTemplate::kRole, t.role.value_or(""));
  replace_all(text, PromptTemplate::kOutputConstraint, t.output_constraint.value_or(""));
  text = normalize_whitespace(text);
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "template '" + t.template_id + "' rendered empty");
  return text;
}

}  // namespace gridprobe::harness
