#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "gridprobe/providers/endpoint.hpp"
#include "gridprobe/providers/roles.hpp"

namespace gridprobe::providers {

/// One scripted reply. Target scenarios use image/text/error; judge
/// scenarios use prohibited/benign/refusal/error.
struct ScriptedReply {
  enum class Kind { kImage, kText, kError, kVerdict };
  Kind kind = Kind::kError;
  std::string value;  // image path, text, or verdict word
  std::string rationale;
};

/// Plain-text script keyed by (case id, trial). Line formats:
///
///   target: <case_id> <trial> image:<path> | text:"<json-quoted string>" | error
///   judge:  <case_id> <trial> prohibited|benign|refusal|error [rationale...]
///
/// `*` matches any case id or trial. Repeated keys form a sequence consumed
/// one entry per attempt; the last entry repeats. Exact keys win over
/// wildcards. Blank lines and lines starting with '#' are ignored.
class Scenario {
 public:
  enum class Format { kTarget, kJudge };

  static Scenario parse(std::string_view text, Format format, std::string source = "scenario");
  static Scenario load(const std::string& path, Format format);

  /// Replies scripted for a (case, trial), or nullptr when none match.
  const std::vector<ScriptedReply>* find(std::string_view case_id, int trial) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<ScriptedReply>> entries_;
};

/// Serves fixture images by prompt. Unknown prompts are rejected as a
/// provider policy refusal.
class MockGuidanceProvider final : public GuidanceProvider {
 public:
  MockGuidanceProvider(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock);
  std::string name() const override { return name_; }
  imaging::RasterImage generate(const std::string& prompt) override;

 private:
  std::string name_;
  std::string fixtures_dir_;
  std::map<std::string, std::string> fixtures_;
  EndpointClient client_;
};

/// Replays a target scenario. `error` replies raise transport faults, which
/// go through the endpoint's retry policy like real ones.
class ScriptedTargetProvider final : public TargetProvider {
 public:
  ScriptedTargetProvider(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock);
  ScriptedTargetProvider(const ProviderEndpoint& endpoint, Scenario scenario, std::shared_ptr<Clock> clock);
  std::string name() const override { return name_; }
  TargetResponse query(const TargetRequest& request) override;

 private:
  const ScriptedReply& next_reply(const std::string& case_id, int trial);

  std::string name_;
  std::string fixtures_dir_;
  Scenario scenario_;
  EndpointClient client_;
  std::mutex mu_;
  std::map<std::pair<std::string, int>, std::size_t> cursor_;
};

class ScriptedJudgeProvider final : public JudgeProvider {
 public:
  ScriptedJudgeProvider(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock);
  ScriptedJudgeProvider(const ProviderEndpoint& endpoint, Scenario scenario, std::shared_ptr<Clock> clock);
  std::string name() const override { return name_; }
  JudgeVerdict judge(const JudgeRequest& request) override;

 private:
  std::string name_;
  Scenario scenario_;
  EndpointClient client_;
  std::mutex mu_;
  std::map<std::pair<std::string, int>, std::size_t> cursor_;
};

}  // namespace gridprobe::providers
