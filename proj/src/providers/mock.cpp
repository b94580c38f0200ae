#include "gridprobe/providers/mock.hpp"

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"
#include "gridprobe/imaging/png_io.hpp"

namespace gridprobe::providers {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string resolve(const std::string& dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || dir.empty()) return path;
  return (fs::path(dir) / path).string();
}

std::string scenario_dir(const ProviderEndpoint& endpoint) {
  if (!endpoint.fixtures_dir.empty()) return endpoint.fixtures_dir;
  return fs::path(endpoint.scenario_path).parent_path().string();
}

Scenario load_endpoint_scenario(const ProviderEndpoint& endpoint, Scenario::Format format) {
  if (endpoint.scenario_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mock endpoint '" + endpoint.name + "' needs a scenario file");
  }
  return Scenario::load(endpoint.scenario_path, format);
}

ScriptedReply parse_target_payload(const std::string& payload, const std::function<Error(std::string)>& fail) {
  if (payload == "error") return {ScriptedReply::Kind::kError, {}, {}};
  if (payload.rfind("image:", 0) == 0) {
    auto path = trim(payload.substr(6));
    if (path.empty()) throw fail("image reply needs a path");
    return {ScriptedReply::Kind::kImage, path, {}};
  }
  if (payload.rfind("text:", 0) == 0) {
    const auto quoted = trim(payload.substr(5));
    const auto parsed = nlohmann::json::parse(quoted, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_string()) throw fail("text reply must be a double-quoted string");
    return {ScriptedReply::Kind::kText, parsed.get<std::string>(), {}};
  }
  throw fail("expected image:<path>, text:\"...\" or error");
}

ScriptedReply parse_judge_payload(const std::string& payload, const std::function<Error(std::string)>& fail) {
  const auto space = payload.find_first_of(" \t");
  const std::string word = payload.substr(0, space);
  const std::string rationale = space == std::string::npos ? std::string() : trim(payload.substr(space));
  if (word == "error") return {ScriptedReply::Kind::kError, {}, rationale};
  if (!parse_verdict(word)) throw fail("expected prohibited, benign, refusal or error");
  return {ScriptedReply::Kind::kVerdict, word, rationale};
}

// Picks the reply for this attempt and advances the per-(case, trial) cursor.
const ScriptedReply& advance(std::map<std::pair<std::string, int>, std::size_t>& cursor,
                             const std::vector<ScriptedReply>& replies, const std::string& case_id, int trial) {
  auto& pos = cursor[{case_id, trial}];
  const auto& reply = replies[std::min(pos, replies.size() - 1)];
  ++pos;
  return reply;
}

}  // namespace

Scenario Scenario::parse(std::string_view text, Format format, std::string source) {
  Scenario scenario;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fail = [&](std::string why) {
      return Error(ErrorCode::kParse, source + " line " + std::to_string(line_no) + ": " + why);
    };
    std::istringstream fields(body);
    std::string case_id;
    std::string trial;
    fields >> case_id >> trial;
    if (case_id.empty() || trial.empty()) throw fail("expected <case_id> <trial> <reply>");
    if (trial != "*") {
      if (trial.find_first_not_of("0123456789") != std::string::npos || std::stoi(trial) < 1) {
        throw fail("trial must be a positive integer or *");
      }
      trial = std::to_string(std::stoi(trial));
    }
    std::string rest;
    std::getline(fields, rest);
    rest = trim(rest);
    if (rest.empty()) throw fail("missing reply");
    ScriptedReply reply = format == Format::kTarget ? parse_target_payload(rest, fail) : parse_judge_payload(rest, fail);
    scenario.entries_[{case_id, trial}].push_back(std::move(reply));
  }
  return scenario;
}

Scenario Scenario::load(const std::string& path, Format format) { return parse(read_file_text(path), format, path); }

const std::vector<ScriptedReply>* Scenario::find(std::string_view case_id, int trial) const {
  const std::string t = std::to_string(trial);
  for (const auto& key : {std::pair<std::string, std::string>{std::string(case_id), t},
                          std::pair<std::string, std::string>{std::string(case_id), "*"},
                          std::pair<std::string, std::string>{"*", t},
                          std::pair<std::string, std::string>{"*", "*"}}) {
    if (auto it = entries_.find(key); it != entries_.end()) return &it->second;
  }
  return nullptr;
}

MockGuidanceProvider::MockGuidanceProvider(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock)
    : name_(endpoint.name),
      fixtures_dir_(endpoint.fixtures_dir),
      fixtures_(endpoint.fixtures),
      client_(endpoint, std::move(clock)) {}

imaging::RasterImage MockGuidanceProvider::generate(const std::string& prompt) {
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "guidance prompt is empty");
  return client_.call([&] {
    auto it = fixtures_.find(prompt);
    if (it == fixtures_.end()) {
      throw Error(ErrorCode::kPolicyRejection, name_ + " has no fixture for prompt \"" + prompt + "\"");
    }
    return imaging::load_png(resolve(fixtures_dir_, it->second));
  });
}

ScriptedTargetProvider::ScriptedTargetProvider(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock)
    : ScriptedTargetProvider(endpoint, load_endpoint_scenario(endpoint, Scenario::Format::kTarget), std::move(clock)) {}

ScriptedTargetProvider::ScriptedTargetProvider(const ProviderEndpoint& endpoint, Scenario scenario,
                                               std::shared_ptr<Clock> clock)
    : name_(endpoint.name),
      fixtures_dir_(scenario_dir(endpoint)),
      scenario_(std::move(scenario)),
      client_(endpoint, std::move(clock)) {}

const ScriptedReply& ScriptedTargetProvider::next_reply(const std::string& case_id, int trial) {
  const auto* replies = scenario_.find(case_id, trial);
  if (!replies) {
    throw Error(ErrorCode::kProviderUnavailable,
                name_ + " has no scripted reply for " + case_id + " trial " + std::to_string(trial));
  }
  std::lock_guard lock(mu_);
  return advance(cursor_, *replies, case_id, trial);
}

TargetResponse ScriptedTargetProvider::query(const TargetRequest& request) {
  request.validate();
  const std::string ref_prefix = "mock:" + name_ + ":" + request.case_id + ":" + std::to_string(request.trial_index);
  try {
    return client_.call([&] {
      const ScriptedReply& reply = next_reply(request.case_id, request.trial_index);
      switch (reply.kind) {
        case ScriptedReply::Kind::kImage:
          return TargetResponse::image_payload(read_file_bytes(resolve(fixtures_dir_, reply.value)), ref_prefix);
        case ScriptedReply::Kind::kText:
          return TargetResponse::text_payload(reply.value, ref_prefix);
        default:
          throw TransportFault("scripted transport error");
      }
    });
  } catch (const Error& e) {
    return TargetResponse::transport_error(e.what());
  }
}

ScriptedJudgeProvider::ScriptedJudgeProvider(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock)
    : ScriptedJudgeProvider(endpoint, load_endpoint_scenario(endpoint, Scenario::Format::kJudge), std::move(clock)) {}

ScriptedJudgeProvider::ScriptedJudgeProvider(const ProviderEndpoint& endpoint, Scenario scenario,
                                             std::shared_ptr<Clock> clock)
    : name_(endpoint.name), scenario_(std::move(scenario)), client_(endpoint, std::move(clock)) {}

JudgeVerdict ScriptedJudgeProvider::judge(const JudgeRequest& request) {
  const auto* replies = scenario_.find(request.case_id, request.trial_index);
  if (!replies) {
    throw Error(ErrorCode::kProviderUnavailable, name_ + " has no scripted verdict for " + request.case_id +
                                                     " trial " + std::to_string(request.trial_index));
  }
  return client_.call([&] {
    ScriptedReply reply;
    {
      std::lock_guard lock(mu_);
      reply = advance(cursor_, *replies, request.case_id, request.trial_index);
    }
    if (reply.kind == ScriptedReply::Kind::kError) throw TransportFault("scripted judge failure");
    return JudgeVerdict{name_, *parse_verdict(reply.value), reply.rationale};
  });
}

}  // namespace gridprobe::providers
