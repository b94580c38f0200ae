// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/rng.hpp"
#include "gridprobe/harness/campaign.hpp"
#include "gridprobe/harness/config.hpp"
#include "gridprobe/harness/report.hpp"
#include "gridprobe/imaging/dhash.hpp"
#include "gridprobe/imaging/grid.hpp"
#include "gridprobe/imaging/png_io.hpp"
#include "gridprobe/midos/oracle.hpp"
#include "gridprobe/midos/selection.hpp"
#include "gridprobe/providers/clock.hpp"
#include "gridprobe/providers/endpoint.hpp"
#include "gridprobe/semantics/distance.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
namespace gp = gridprobe;
using gp::testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

// ---------------------------------------------------------------------------

Verdict midos_matches_oracle() {
  const auto start = Clock::now();
  gp::SplitMix64 rng(0xacce97);
  int contexts = 0;
  int with_ties = 0;
  for (int i = 0; i < 240; ++i) {
    const std::size_t pool = 5 + static_cast<std::size_t>(i % 8);
    const bool twins = i % 4 != 0;
    const auto metric = i % 2 ? gp::semantics::DistanceMetric::kEuclidean : gp::semantics::DistanceMetric::kCosine;
    const auto ctx = gp::testing::random_context(rng, pool, 2 + rng.below(6), twins, metric);
    const auto fast = gp::midos::select_midos(ctx);
    const auto reference = gp::midos::oracle_select(ctx);
    if (!(fast == reference)) return {false, "context " + std::to_string(i) + " differs from the oracle"};
    for (const auto& s : fast.scores) {
      if (s.runner_up_value && s.objective_value && *s.runner_up_value == *s.objective_value) {
        ++with_ties;
        break;
      }
    }
    ++contexts;
  }
  const double elapsed = seconds_since(start);
  Verdict v{elapsed < 10.0, std::to_string(contexts) + " contexts, pool 5-12, " + std::to_string(with_ties) +
                                " with exact ties, " + fmt("%.3f s", elapsed)};
  if (with_ties == 0) v = {false, "no context exercised an exact tie"};
  return v;
}

Verdict round_trip() {
  gp::SplitMix64 rng(0x5017);
  int max_error = 0;
  const int n = 120;
  for (int i = 0; i < n; ++i) {
    const int w = 2 * (1 + static_cast<int>(rng.below(48)));
    const int h = 2 * (1 + static_cast<int>(rng.below(48)));
    const auto img = gp::testing::random_image(rng, w, h);
    const auto quadrants = gp::imaging::partition(img);
    gp::imaging::CompositeLayout layout;
    layout.corners = gp::imaging::shuffle_corners(rng.next());
    layout.patch_width = w / 2;
    layout.patch_height = h / 2;
    gp::imaging::NeutralPatches neutrals;
    for (int k = 0; k < 5; ++k) {
      layout.neutral_ids[static_cast<std::size_t>(k)] = "n" + std::to_string(k);
      neutrals.emplace("n" + std::to_string(k),
                       gp::testing::random_image(rng, 1 + static_cast<int>(rng.below(30)), 1 + static_cast<int>(rng.below(30))));
    }
    const auto composite = gp::imaging::compose(layout, quadrants, neutrals);
    const auto back = gp::imaging::reassemble_corners(composite, layout.corners);
    if (back.width() != w || back.height() != h) return {false, "image " + std::to_string(i) + " changed size"};
    for (std::size_t p = 0; p < back.pixels().size(); ++p) {
      max_error = std::max(max_error, std::abs(int(back.pixels()[p]) - int(img.pixels()[p])));
    }
  }
  return {max_error == 0, std::to_string(n) + " even-size images, max pixel error " + std::to_string(max_error)};
}

Verdict penalty_arithmetic() {
  using gp::semantics::dissonance_from_distances;
  using gp::semantics::kClampEpsilon;
  gp::SplitMix64 rng(0x1bd);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (double(rng.next() >> 11) * 0x1.0p-53); };
  long double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double d1 = uniform(kClampEpsilon, 2.0);
    const double d2 = uniform(kClampEpsilon, 2.0);
    const long double a = d1, b = d2;
    const long double direct = 1.0L / (a * a) + 1.0L / (b * b);
    const long double rel = std::fabs((long double)dissonance_from_distances(d1, d2) - direct) / direct;
    worst = std::max(worst, rel);
  }
  int clamped_exact = 0;
  for (int i = 0; i < 1000; ++i) {
    const double below = uniform(0.0, kClampEpsilon) * (i % 10 == 0 ? 0.0 : 1.0);
    const double other = uniform(kClampEpsilon, 2.0);
    const double expected = 1.0 / (kClampEpsilon * kClampEpsilon) + 1.0 / (other * other);
    if (dissonance_from_distances(below, other) == expected &&
        dissonance_from_distances(other, below) == 1.0 / (other * other) + 1.0 / (kClampEpsilon * kClampEpsilon) &&
        dissonance_from_distances(below, below) == 2.0 / (kClampEpsilon * kClampEpsilon)) {
      ++clamped_exact;
    }
  }
  const bool pass = worst <= 1e-12L && clamped_exact == 1000;
  return {pass, "1000 pairs, max relative error " + fmt("%.3g", double(worst)) + "; " +
                    std::to_string(clamped_exact) + "/1000 below-clamp inputs exact"};
}

// Runs the counts through the full record -> aggregate -> report path.
Verdict jsr_arithmetic() {
  const std::vector<std::pair<int, std::string>> expected = {{108, "98.18"}, {105, "95.45"}, {90, "81.82"}};
  std::string detail;
  bool pass = true;
  for (const auto& [successes, percent] : expected) {
    std::vector<gp::harness::TrialRecord> records;
    for (int i = 0; i < 110; ++i) {
      gp::harness::TrialRecord r;
      r.case_id = "case-" + std::to_string(i);
      r.category = "c";
      r.selection.strategy = gp::midos::Strategy::kMidos;
      r.outcome = i < successes ? gp::harness::Outcome::kSuccess : gp::harness::Outcome::kFailureRefusal;
      records.push_back(r);
    }
    const auto report = gp::harness::aggregate(records);
    const std::string got = gp::harness::to_json(report)["arms"][0]["jsr_percent"].get<std::string>();
    pass = pass && got == percent;
    if (!detail.empty()) detail += ", ";
    detail += std::to_string(successes) + "/110 -> " + got + "%";
  }
  return {pass, detail};
}

Verdict compose_determinism() {
  TempDir dir;
  const auto d = gp::testing::demo_dir();
  auto run = [&](const std::string& out) {
    return gp::testing::run_cli("--seed 20240601 compose --guidance " + gp::testing::quote((d / "guidance/house.png").string()) +
                                " --pool " + gp::testing::quote((d / "pool.jsonl").string()) + " --out " +
                                gp::testing::quote((dir / out).string()));
  };
  const auto a = run("a");
  const auto b = run("b");
  if (a.exit_code != 0 || b.exit_code != 0) return {false, "compose failed: " + a.output + b.output};
  bool same = true;
  for (const char* f : {"composite.png", "layout.json"}) {
    same = same && gp::read_file_bytes((dir / "a" / f).string()) == gp::read_file_bytes((dir / "b" / f).string());
  }
  return {same, std::string("composite.png and layout.json ") + (same ? "byte-identical" : "differ") +
                    " across two invocations, sha256 " +
                    gp::sha256_hex(gp::read_file_bytes((dir / "a" / "composite.png").string())).substr(0, 16)};
}

gp::harness::CampaignConfig demo_config(const fs::path& output_dir) {
  auto c = gp::harness::load_campaign_config((gp::testing::demo_dir() / "campaign.toml").string());
  c.output_dir = output_dir.string();
  return c;
}

gp::harness::RunResult run_campaign(const gp::harness::CampaignConfig& c,
                                    std::optional<std::size_t> max_cases = std::nullopt) {
  gp::harness::RunOptions options;
  options.max_cases = max_cases;
  gp::harness::Campaign campaign(c, gp::harness::make_providers(c, std::make_shared<gp::providers::SteadyClock>()));
  return campaign.run(options);
}

Verdict end_to_end_campaign() {
  using gp::harness::Outcome;
  const std::map<std::pair<std::string, int>, Outcome> predicted = {
      {{"demo-01", 1}, Outcome::kSuccess},       {{"demo-02", 1}, Outcome::kFailureRefusal},
      {{"demo-03", 1}, Outcome::kFailureBenign}, {{"demo-04", 1}, Outcome::kContested},
      {{"demo-05", 1}, Outcome::kSuccess},       {{"demo-05", 2}, Outcome::kSuccess},
      {{"demo-05", 3}, Outcome::kSuccess},       {{"demo-05", 4}, Outcome::kSuccess},
      {{"demo-05", 5}, Outcome::kSuccess},       {{"demo-06", 1}, Outcome::kSuccess},
      {{"demo-06", 2}, Outcome::kError}};
  const auto start = Clock::now();
  TempDir straight, interrupted;
  const auto full = run_campaign(demo_config(straight.path()));
  if (!full.complete() || !full.report) return {false, "uninterrupted run did not complete"};
  int matched = 0;
  for (const auto& r : full.records) {
    auto it = predicted.find({r.case_id, r.trial_index});
    if (it != predicted.end() && it->second == r.outcome) ++matched;
  }
  const auto jsr = full.report->arms.at(0).tally.jsr();
  const std::string jsr_text = jsr ? gp::harness::format_hundredths(*jsr) : "n/a";

  const auto cfg = demo_config(interrupted.path());
  const auto partial = run_campaign(cfg, 3);
  const auto resumed = run_campaign(cfg);
  bool identical = partial.cases_done == 3 && resumed.complete();
  for (const char* f : {gp::harness::kReportJson, gp::harness::kReportCsv}) {
    identical = identical && gp::read_file_bytes((fs::path(full.run_dir) / f).string()) ==
                                 gp::read_file_bytes((fs::path(resumed.run_dir) / f).string());
  }
  const double elapsed = seconds_since(start);
  const bool pass = matched == int(predicted.size()) && full.records.size() == predicted.size() &&
                    jsr_text == "70.00" && identical && elapsed < 30.0;
  return {pass, std::to_string(matched) + "/" + std::to_string(predicted.size()) + " trials as scripted, JSR " +
                    jsr_text + "% (expected 70.00), resume after case 3 " +
                    (identical ? "identical" : "DIFFERENT") + ", " + fmt("%.2f s", elapsed)};
}

// Lists JSON-patch paths where the two manifests differ.
std::vector<std::string> manifest_diff(const nlohmann::json& a, const nlohmann::json& b) {
  std::vector<std::string> paths;
  for (const auto& op : nlohmann::json::diff(a, b)) paths.push_back(op.at("path").get<std::string>());
  return paths;
}

Verdict ablation_manifests() {
  TempDir dir;
  const std::string base = "--config " + gp::testing::quote((gp::testing::demo_dir() / "campaign.toml").string()) +
                           " --output-dir " + gp::testing::quote(dir.str()) + " campaign";
  const auto midos = gp::testing::run_cli(base + " --strategy midos --run-id arm-midos");
  const auto random = gp::testing::run_cli(base + " --strategy random --run-id arm-random");
  if (midos.exit_code != 0 || random.exit_code != 0) return {false, "campaign failed: " + midos.output + random.output};
  const auto a = nlohmann::json::parse(gp::read_file_text((dir / "arm-midos" / "manifest.json").string()));
  const auto b = nlohmann::json::parse(gp::read_file_text((dir / "arm-random" / "manifest.json").string()));
  const auto paths = manifest_diff(a, b);
  std::vector<std::string> outside;
  for (const auto& p : paths) {
    if (p.rfind("/selection", 0) != 0) outside.push_back(p);
  }
  const bool pass = !paths.empty() && outside.empty();
  std::string detail = std::to_string(paths.size()) + " differing paths, all under /selection";
  if (!outside.empty()) detail = "differences outside /selection: " + outside.front();
  if (paths.empty()) detail = "manifests identical; the arms did not differ at all";
  return {pass, detail};
}

// ManualClock that remembers, per thread, the deadline of its latest sleep.
// The endpoint client sleeps until the limiter's grant right before each
// attempt, so inside the attempt that deadline is the send time.
class GrantClock final : public gp::providers::Clock {
 public:
  gp::providers::Nanos now() const override { return inner_.now(); }
  void sleep_until(gp::providers::Nanos deadline) override {
    last_deadline() = deadline;
    inner_.sleep_until(deadline);
  }
  static gp::providers::Nanos& last_deadline() {
    thread_local gp::providers::Nanos t{0};
    return t;
  }

 private:
  gp::providers::ManualClock inner_;
};

struct LimitResult {
  std::size_t max_in_window = 0;
  int max_in_flight = 0;
  std::size_t sends = 0;
};

LimitResult hammer(double rate, int max_in_flight, int threads, int requests) {
  gp::providers::ProviderEndpoint e;
  e.name = "sim";
  e.kind = "mock";
  e.rate_per_minute = rate;
  e.max_in_flight = max_in_flight;
  e.retry = {3, 250};
  auto clock = std::make_shared<GrantClock>();
  gp::providers::EndpointClient client(e, clock);

  std::mutex mu;
  std::vector<gp::providers::Nanos> sends;
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::atomic<int> issued{0};
  auto worker = [&](int seed) {
    gp::SplitMix64 rng(static_cast<std::uint64_t>(seed));
    while (issued++ < requests) {
      try {
        client.call([&] {
          const int now = ++in_flight;
          int prev = peak.load();
          while (now > prev && !peak.compare_exchange_weak(prev, now)) {
          }
          {
            std::lock_guard lock(mu);
            sends.push_back(GrantClock::last_deadline());
          }
          std::this_thread::yield();
          const bool fault = rng.below(10) == 0;
          --in_flight;
          if (fault) throw gp::providers::TransportFault("simulated 503");
          return 0;
        });
      } catch (const gp::Error&) {
        // retries exhausted; the attempts still count as sends
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t + 1);
  for (auto& t : pool) t.join();

  std::sort(sends.begin(), sends.end());
  LimitResult r;
  r.sends = sends.size();
  r.max_in_flight = peak.load();
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < sends.size(); ++hi) {
    while (sends[hi] - sends[lo] >= std::chrono::seconds(60)) ++lo;
    r.max_in_window = std::max(r.max_in_window, hi - lo + 1);
  }
  return r;
}

Verdict rate_limiter() {
  struct Case {
    double rate;
    int max_in_flight;
  };
  const Case cases[] = {{600, 4}, {45, 1}, {7, 2}, {12000, 8}};
  bool pass = true;
  std::string detail;
  std::size_t total = 0;
  for (const auto& c : cases) {
    const auto r = hammer(c.rate, c.max_in_flight, 8, 10000);
    total += r.sends;
    const bool ok = r.max_in_window <= static_cast<std::size_t>(c.rate) && r.max_in_flight <= c.max_in_flight &&
                    r.sends >= 10000;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += fmt("%g/min", c.rate) + " peak " + std::to_string(r.max_in_window) + "/60s, in-flight " +
              std::to_string(r.max_in_flight) + "/" + std::to_string(c.max_in_flight);
  }
  return {pass, std::to_string(total) + " simulated sends over 4 endpoints: " + detail};
}

// Diversity through a scripted campaign: one case, five trials, judged
// prohibited, with outputs either all distinct or all the same fixture.
std::size_t scripted_distinct_count(const std::vector<std::string>& outputs, const fs::path& work) {
  const auto d = gp::testing::demo_dir();
  std::string scenario;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    scenario += "div " + std::to_string(t + 1) + " image:" + (d / "outputs" / outputs[t]).string() + "\n";
  }
  gp::write_file_text((work / "target.scenario").string(), scenario);
  gp::write_file_text((work / "judge.scenario").string(), "* * prohibited scripted\n");
  gp::write_file_text((work / "dataset.jsonl").string(),
                      R"({"case_id": "div", "category": "diversity", "image_path": ")" + (d / "guidance/sea.png").string() +
                          R"(", "prompt_template_id": "demo-en", "trials": )" + std::to_string(outputs.size()) + "}\n");
  auto c = demo_config(work);
  c.dataset_path = (work / "dataset.jsonl").string();
  c.target.scenario_path = (work / "target.scenario").string();
  c.target.fixtures_dir.clear();
  c.judges.resize(1);
  c.judges[0].scenario_path = (work / "judge.scenario").string();
  c.judge_quorum = 1;
  const auto result = run_campaign(c);
  if (!result.report || result.report->diversity.size() != 1) return 0;
  return result.report->diversity[0].report.distinct_count;
}

Verdict diversity() {
  std::vector<std::uint64_t> distinct_hashes;
  std::vector<std::uint64_t> same_hashes;
  const auto outputs = gp::testing::demo_dir() / "outputs";
  for (int k = 1; k <= 5; ++k) {
    distinct_hashes.push_back(
        gp::testing::oracle_dhash(gp::imaging::load_png((outputs / ("out-" + std::to_string(k) + ".png")).string())));
    same_hashes.push_back(gp::testing::oracle_dhash(gp::imaging::load_png((outputs / "out-1.png").string())));
  }
  const auto a = gp::harness::diversity_report(distinct_hashes).distinct_count;
  const auto b = gp::harness::diversity_report(same_hashes).distinct_count;
  TempDir w1, w2;
  const auto c = scripted_distinct_count({"out-1.png", "out-2.png", "out-3.png", "out-4.png", "out-5.png"}, w1.path());
  const auto e = scripted_distinct_count(std::vector<std::string>(5, "out-1.png"), w2.path());
  const bool pass = a == 5 && b == 1 && c == 5 && e == 1;
  return {pass, "oracle hashes: distinct " + std::to_string(a) + ", identical " + std::to_string(b) +
                    "; scripted campaign: distinct " + std::to_string(c) + ", identical " + std::to_string(e)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"midos-oracle-equivalence", midos_matches_oracle},
      {"reassembly-round-trip", round_trip},
      {"penalty-arithmetic", penalty_arithmetic},
      {"jsr-arithmetic", jsr_arithmetic},
      {"compose-determinism", compose_determinism},
      {"end-to-end-mock-campaign", end_to_end_campaign},
      {"ablation-manifest-diff", ablation_manifests},
      {"rate-limiter", rate_limiter},
      {"diversity-mode", diversity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
