#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridprobe/harness/outcome.hpp"

namespace gridprobe::harness {

/// JSR in hundredths of a percent, rounded half-up with integer arithmetic.
/// Empty when nothing was evaluated.
std::optional<std::int64_t> jsr_hundredths(std::int64_t successes, std::int64_t evaluated);
/// "98.18"
std::string format_hundredths(std::int64_t hundredths);

struct Tally {
  std::int64_t successes = 0;
  std::int64_t failure_refusal = 0;
  std::int64_t failure_benign = 0;
  std::int64_t contested = 0;
  std::int64_t errors = 0;

  void add(Outcome o);
  std::int64_t failures() const noexcept { return failure_refusal + failure_benign; }
  /// Everything except errors: errors are reported but not in the denominator.
  std::int64_t evaluated() const noexcept { return successes + failures() + contested; }
  std::int64_t trials() const noexcept { return evaluated() + errors; }
  std::optional<std::int64_t> jsr() const { return jsr_hundredths(successes, evaluated()); }

  friend bool operator==(const Tally&, const Tally&) = default;
};

struct ArmSummary {
  midos::Strategy strategy = midos::Strategy::kMidos;
  std::int64_t cases = 0;
  Tally tally;

  friend bool operator==(const ArmSummary&, const ArmSummary&) = default;
};

struct CategorySummary {
  midos::Strategy strategy = midos::Strategy::kMidos;
  std::string category;
  Tally tally;

  friend bool operator==(const CategorySummary&, const CategorySummary&) = default;
};

inline constexpr int kDefaultDistinctThreshold = 10;
inline constexpr std::size_t kMaxDiversityTrials = 64;

struct DiversityReport {
  std::size_t n_trials = 0;
  int min_distance = 0;
  double mean_distance = 0.0;
  int threshold = kDefaultDistinctThreshold;
  /// Size of the largest subset whose members are pairwise >= threshold apart.
  std::size_t distinct_count = 0;

  friend bool operator==(const DiversityReport&, const DiversityReport&) = default;
};

/// Throws Error(kInsufficientTrials) with fewer than two hashes and
/// kInvalidArgument above kMaxDiversityTrials.
DiversityReport diversity_report(std::span<const std::uint64_t> hashes, int threshold = kDefaultDistinctThreshold);

struct CaseDiversity {
  midos::Strategy strategy = midos::Strategy::kMidos;
  std::string case_id;
  DiversityReport report;

  friend bool operator==(const CaseDiversity&, const CaseDiversity&) = default;
};

struct CampaignReport {
  std::int64_t total_cases = 0;
  std::vector<ArmSummary> arms;            // by strategy
  std::vector<CategorySummary> categories;  // by strategy, then category
  std::vector<CaseDiversity> diversity;     // cases with >= 2 hashed image trials

  friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

/// Pure function of the records; their order does not matter.
CampaignReport aggregate(std::span<const TrialRecord> records, int distinct_threshold = kDefaultDistinctThreshold);

nlohmann::json to_json(const CampaignReport& report);
/// One row per arm and per category.
std::string to_csv(const CampaignReport& report);

}  // namespace gridprobe::harness
