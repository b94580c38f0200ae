#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridprobe/harness/config.hpp"
#include "gridprobe/harness/outcome.hpp"
#include "gridprobe/harness/report.hpp"
#include "gridprobe/providers/clock.hpp"
#include "gridprobe/providers/roles.hpp"
#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::harness {

struct ProviderSet {
  std::shared_ptr<providers::GuidanceProvider> guidance;  // optional when every case ships an image
  std::shared_ptr<providers::TargetProvider> target;
  std::vector<std::shared_ptr<providers::JudgeProvider>> judges;
  std::shared_ptr<const semantics::Embedder> embedder;
};

/// Instantiates the configured providers: "mock" endpoints get the scripted
/// implementations, "http" endpoints the HTTP adapters.
ProviderSet make_providers(const CampaignConfig& config, std::shared_ptr<providers::Clock> clock);

struct RunOptions {
  /// Process only the first N dataset cases, then stop as if interrupted.
  std::optional<std::size_t> max_cases;
  std::function<void(const std::string&)> log;
};

struct RunResult {
  std::string run_dir;
  std::size_t cases_total = 0;
  std::size_t cases_done = 0;
  std::vector<TrialRecord> records;
  std::optional<CampaignReport> report;  // once every case is done

  bool complete() const noexcept { return cases_done == cases_total; }
};

/// Runs (or resumes) a campaign into runs/<run_id>/. Each stage of each case
/// is persisted and journaled before the next starts, so an interrupted run
/// picks up at the first missing stage. A failing stage turns the case's
/// remaining trials into outcome=error records; it never stops the campaign.
class Campaign {
 public:
  Campaign(CampaignConfig config, ProviderSet providers);
  RunResult run(const RunOptions& options = {});

 private:
  CampaignConfig config_;
  ProviderSet providers_;
};

inline constexpr const char* kJournalFile = "journal.ndjson";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportCsv = "report.csv";

/// Trial records from a run's journal, sorted by (case_id, trial_index).
std::vector<TrialRecord> load_trial_records(const std::string& run_dir);

/// Recomputes the report from the journal (threshold from the manifest)
/// and rewrites report.json / report.csv.
CampaignReport recompute_report(const std::string& run_dir);

/// Deterministic pretty JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace gridprobe::harness
