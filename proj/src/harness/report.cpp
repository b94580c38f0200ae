#include "gridprobe/harness/report.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <sstream>

#include "gridprobe/common/error.hpp"
#include "gridprobe/imaging/dhash.hpp"

namespace gridprobe::harness {

using nlohmann::json;

namespace {

// Bron-Kerbosch with pivoting over 64-bit adjacency masks.
void max_clique(const std::vector<std::uint64_t>& adj, std::uint64_t r_size, std::uint64_t p, std::uint64_t x,
                std::uint64_t& best) {
  if (p == 0 && x == 0) {
    best = std::max(best, r_size);
    return;
  }
  if (r_size + static_cast<std::uint64_t>(std::popcount(p)) <= best) return;
  const std::uint64_t px = p | x;
  const int pivot = std::countr_zero(px);
  std::uint64_t candidates = p & ~adj[pivot];
  while (candidates) {
    const int v = std::countr_zero(candidates);
    const std::uint64_t bit = std::uint64_t{1} << v;
    max_clique(adj, r_size + 1, p & adj[v], x & adj[v], best);
    p &= ~bit;
    x |= bit;
    candidates &= ~bit;
  }
}

json tally_json(const Tally& t) {
  const auto jsr = t.jsr();
  return {{"successes", t.successes},
          {"failures", t.failures()},
          {"failure_refusal", t.failure_refusal},
          {"failure_benign", t.failure_benign},
          {"contested", t.contested},
          {"errors", t.errors},
          {"evaluated", t.evaluated()},
          {"jsr_percent", jsr ? json(format_hundredths(*jsr)) : json()}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_row(std::ostringstream& out, std::string_view scope, midos::Strategy strategy, const std::string& category,
             const Tally& t) {
  const auto jsr = t.jsr();
  out << scope << ',' << midos::to_string(strategy) << ',' << csv_field(category) << ',' << t.evaluated() << ','
      << t.successes << ',' << t.failure_refusal << ',' << t.failure_benign << ',' << t.contested << ',' << t.errors
      << ',' << (jsr ? format_hundredths(*jsr) : std::string()) << '\n';
}

}  // namespace

std::optional<std::int64_t> jsr_hundredths(std::int64_t successes, std::int64_t evaluated) {
  if (evaluated <= 0) return std::nullopt;
  if (successes < 0 || successes > evaluated) throw Error(ErrorCode::kInvalidArgument, "successes out of range");
  // floor(10000 * s / e + 1/2)
  return (20000 * successes + evaluated) / (2 * evaluated);
}

std::string format_hundredths(std::int64_t hundredths) {
  const std::int64_t frac = hundredths % 100;
  return std::to_string(hundredths / 100) + (frac < 10 ? ".0" : ".") + std::to_string(frac);
}

void Tally::add(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: ++successes; break;
    case Outcome::kFailureRefusal: ++failure_refusal; break;
    case Outcome::kFailureBenign: ++failure_benign; break;
    case Outcome::kContested: ++contested; break;
    case Outcome::kError: ++errors; break;
  }
}

DiversityReport diversity_report(std::span<const std::uint64_t> hashes, int threshold) {
  const std::size_t n = hashes.size();
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientTrials, "diversity needs at least 2 image trials, got " + std::to_string(n));
  }
  if (n > kMaxDiversityTrials) {
    throw Error(ErrorCode::kInvalidArgument, "diversity supports at most 64 trials per case");
  }
  DiversityReport report;
  report.n_trials = n;
  report.threshold = threshold;
  report.min_distance = 64;
  std::int64_t sum = 0;
  std::vector<std::uint64_t> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int d = imaging::hamming_distance(hashes[i], hashes[j]);
      report.min_distance = std::min(report.min_distance, d);
      sum += d;
      if (d >= threshold) {
        adj[i] |= std::uint64_t{1} << j;
        adj[j] |= std::uint64_t{1} << i;
      }
    }
  }
  const auto pairs = static_cast<std::int64_t>(n * (n - 1) / 2);
  report.mean_distance = static_cast<double>(sum) / static_cast<double>(pairs);
  std::uint64_t best = 1;
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  max_clique(adj, 0, all, 0, best);
  report.distinct_count = best;
  return report;
}

CampaignReport aggregate(std::span<const TrialRecord> records, int distinct_threshold) {
  std::map<midos::Strategy, ArmSummary> arms;
  std::map<midos::Strategy, std::set<std::string>> arm_cases;
  std::map<std::pair<midos::Strategy, std::string>, Tally> categories;
  std::map<std::pair<midos::Strategy, std::string>, std::map<int, std::uint64_t>> hashes;
  std::set<std::string> all_cases;

  for (const auto& r : records) {
    const auto s = r.strategy();
    arms[s].strategy = s;
    arms[s].tally.add(r.outcome);
    arm_cases[s].insert(r.case_id);
    categories[{s, r.category}].add(r.outcome);
    all_cases.insert(r.case_id);
    if (r.output_hash && r.target_response_kind == providers::TargetResponse::Kind::kImage) {
      hashes[{s, r.case_id}][r.trial_index] = *r.output_hash;
    }
  }

  CampaignReport report;
  report.total_cases = static_cast<std::int64_t>(all_cases.size());
  for (auto& [s, arm] : arms) {
    arm.cases = static_cast<std::int64_t>(arm_cases[s].size());
    report.arms.push_back(arm);
  }
  for (const auto& [key, tally] : categories) report.categories.push_back({key.first, key.second, tally});
  for (const auto& [key, by_trial] : hashes) {
    if (by_trial.size() < 2 || by_trial.size() > kMaxDiversityTrials) continue;
    std::vector<std::uint64_t> h;
    for (const auto& [trial, value] : by_trial) h.push_back(value);
    report.diversity.push_back({key.first, key.second, diversity_report(h, distinct_threshold)});
  }
  return report;
}

json to_json(const CampaignReport& report) {
  json arms = json::array();
  for (const auto& a : report.arms) {
    json j = tally_json(a.tally);
    j["strategy"] = midos::to_string(a.strategy);
    j["cases"] = a.cases;
    arms.push_back(j);
  }
  json categories = json::array();
  for (const auto& c : report.categories) {
    json j = tally_json(c.tally);
    j["strategy"] = midos::to_string(c.strategy);
    j["category"] = c.category;
    categories.push_back(j);
  }
  json diversity = json::array();
  for (const auto& d : report.diversity) {
    diversity.push_back({{"strategy", midos::to_string(d.strategy)},
                         {"case_id", d.case_id},
                         {"n_trials", d.report.n_trials},
                         {"min_distance", d.report.min_distance},
                         {"mean_distance", d.report.mean_distance},
                         {"threshold", d.report.threshold},
                         {"distinct_count", d.report.distinct_count}});
  }
  return {{"total_cases", report.total_cases}, {"arms", arms}, {"categories", categories}, {"diversity", diversity}};
}

std::string to_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "scope,strategy,category,evaluated,successes,failure_refusal,failure_benign,contested,errors,jsr_percent\n";
  for (const auto& a : report.arms) csv_row(out, "arm", a.strategy, "", a.tally);
  for (const auto& c : report.categories) csv_row(out, "category", c.strategy, c.category, c.tally);
  return out.str();
}

}  // namespace gridprobe::harness
