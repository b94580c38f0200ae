#include "gridprobe/harness/campaign.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"
#include "gridprobe/common/rng.hpp"
#include "gridprobe/harness/dataset.hpp"
#include "gridprobe/harness/journal.hpp"
#include "gridprobe/harness/pipeline.hpp"
#include "gridprobe/harness/prompt_template.hpp"
#include "gridprobe/imaging/dhash.hpp"
#include "gridprobe/imaging/png_io.hpp"
#include "gridprobe/providers/adapters.hpp"
#include "gridprobe/providers/judging.hpp"
#include "gridprobe/providers/mock.hpp"
#include "gridprobe/providers/transport.hpp"
#include "gridprobe/semantics/histogram.hpp"
#include "gridprobe/semantics/store.hpp"

namespace gridprobe::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using providers::TargetResponse;

namespace {

struct CaseState {
  std::optional<json> guidance;
  std::optional<json> selection;
  std::optional<json> composite;
  std::optional<json> prompt;
  std::optional<json> error;
  std::map<int, TrialRecord> trials;
  bool done = false;
};

using CaseStates = std::map<std::string, CaseState>;

CaseStates replay(const std::vector<json>& events) {
  CaseStates states;
  for (const auto& e : events) {
    const std::string type = e.value("event", "");
    if (type == "trial") {
      TrialRecord r = trial_from_json(e.at("record"));
      const std::string id = r.case_id;
      const int t = r.trial_index;
      states[id].trials.insert_or_assign(t, std::move(r));
      continue;
    }
    const std::string id = e.value("case_id", "");
    if (id.empty()) continue;
    auto& s = states[id];
    if (type == "guidance") s.guidance = e;
    else if (type == "selection") s.selection = e;
    else if (type == "composite") s.composite = e;
    else if (type == "prompt") s.prompt = e;
    else if (type == "case_error") s.error = e;
    else if (type == "case_done") s.done = true;
  }
  return states;
}

std::string short_sha(const std::string& sha) { return sha.substr(0, 16); }

// Bytes of a journaled artifact when the file is still present and intact.
std::optional<std::vector<std::uint8_t>> verified_artifact(const std::string& run_dir, const std::optional<json>& event) {
  if (!event) return std::nullopt;
  const fs::path path = fs::path(run_dir) / event->at("path").get<std::string>();
  if (!fs::exists(path)) return std::nullopt;
  auto bytes = read_file_bytes(path.string());
  if (sha256_hex(bytes) != event->at("sha256").get<std::string>()) return std::nullopt;
  return bytes;
}

std::shared_ptr<providers::Transport> http_transport(const providers::ProviderEndpoint& e) {
  return std::make_shared<providers::HttpTransport>(e.base_url, e.timeout_s);
}

std::string file_sha_or_empty(const std::string& path) {
  if (path.empty() || !fs::exists(path)) return {};
  return sha256_hex(read_file_bytes(path));
}

class Runner {
 public:
  Runner(const CampaignConfig& config, const ProviderSet& providers, const RunOptions& options)
      : config_(config), providers_(providers), options_(options), run_dir_(config.run_dir()) {}

  RunResult run();

 private:
  void run_case(const CaseSpec& spec, const CaseState& state);
  TrialRecord run_trial(const CaseSpec& spec, const std::string& seed_dir, const std::string& composite_rel,
                        const midos::SelectionResult& selection, const imaging::RasterImage& composite,
                        const std::string& prompt, int trial);
  std::string persist(const std::string& rel, std::span<const std::uint8_t> bytes) const;
  json build_manifest(const CaseStates& states) const;
  void log(const std::string& line);

  const CampaignConfig& config_;
  const ProviderSet& providers_;
  const RunOptions& options_;
  std::string run_dir_;

  std::vector<CaseSpec> cases_;
  TemplateSet templates_;
  NeutralPool pool_;
  std::vector<semantics::Embedding> pool_embeddings_;
  std::unique_ptr<Journal> journal_;
  std::mutex log_mu_;
};

void Runner::log(const std::string& line) {
  if (!options_.log) return;
  std::lock_guard lock(log_mu_);
  options_.log(providers::scrub_secrets(line));
}

std::string Runner::persist(const std::string& rel, std::span<const std::uint8_t> bytes) const {
  write_file_bytes((fs::path(run_dir_) / rel).string(), bytes);
  return sha256_hex(bytes);
}

TrialRecord Runner::run_trial(const CaseSpec& spec, const std::string& seed_dir, const std::string& composite_rel,
                              const midos::SelectionResult& selection, const imaging::RasterImage& composite,
                              const std::string& prompt, int trial) {
  providers::TargetRequest request{spec.case_id, composite, prompt, trial};
  TargetResponse response;
  try {
    response = providers_.target->query(request);
  } catch (const Error& e) {
    response = TargetResponse::transport_error(e.what());
  }

  TrialRecord r;
  r.case_id = spec.case_id;
  r.category = spec.category;
  r.trial_index = trial;
  r.composite_path = composite_rel;
  r.selection = selection;
  r.target_response_kind = response.kind;
  r.quorum = config_.effective_quorum();

  const std::string stem = seed_dir + "/trial-" + std::to_string(trial) + "-";
  if (response.kind == TargetResponse::Kind::kImage) {
    const std::string sha = sha256_hex(response.image);
    r.output_path = stem + short_sha(sha) + ".png";
    persist(r.output_path, response.image);
    try {
      r.output_hash = imaging::perceptual_hash(imaging::decode_png(response.image));
    } catch (const Error&) {
      // Judges still see the bytes; only diversity loses this trial.
    }
  } else if (response.kind == TargetResponse::Kind::kText) {
    // A misbehaving endpoint may echo request headers back.
    response.text = providers::scrub_secrets(std::move(response.text));
    const std::string sha = sha256_hex(response.text);
    r.output_path = stem + short_sha(sha) + ".txt";
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(response.text.data()),
                                              response.text.size());
    persist(r.output_path, bytes);
  } else {
    r.error_detail = providers::scrub_secrets(response.error_detail);
  }

  const auto judged = providers::judge_output(response, providers_.judges, config_.judging, spec.case_id, trial);
  r.verdicts = judged.verdicts;
  for (auto& v : r.verdicts) v.rationale = providers::scrub_secrets(std::move(v.rationale));
  for (const auto& m : judged.missing) r.missing_judges.push_back(providers::scrub_secrets(m));
  r.outcome = derive_outcome(r.target_response_kind, r.verdicts, r.quorum);
  if (r.outcome == Outcome::kError && r.error_detail.empty()) {
    r.error_detail = "judge quorum not met: " + std::to_string(r.verdicts.size()) + " of " + std::to_string(r.quorum);
  }
  return r;
}

void Runner::run_case(const CaseSpec& spec, const CaseState& state) {
  const std::string& id = spec.case_id;
  const std::uint64_t seed = case_seed(config_.seed, id);
  const std::string case_dir = "artifacts/" + id;
  const std::string seed_dir = case_dir + "/" + std::to_string(seed);

  std::string stage = "guidance";
  midos::SelectionResult selection;
  selection.strategy = config_.strategy;
  std::string composite_rel;
  std::map<int, bool> recorded;
  for (const auto& [t, r] : state.trials) recorded[t] = true;

  try {
    imaging::RasterImage guidance;
    if (auto bytes = verified_artifact(run_dir_, state.guidance)) {
      guidance = imaging::decode_png(*bytes);
    } else {
      std::string source;
      if (const auto* file = std::get_if<ImageGuidance>(&spec.guidance)) {
        guidance = imaging::load_png(file->image_path);
        source = "file";
      } else {
        if (!providers_.guidance) throw Error(ErrorCode::kInvalidArgument, "no guidance provider configured");
        guidance = providers_.guidance->generate(std::get<PromptGuidance>(spec.guidance).prompt);
        source = providers_.guidance->name();
      }
      const auto png = imaging::encode_png(guidance);
      const std::string sha = sha256_hex(png);
      const std::string rel = case_dir + "/guidance-" + short_sha(sha) + ".png";
      persist(rel, png);
      journal_->append({{"event", "guidance"}, {"case_id", id}, {"path", rel}, {"sha256", sha}, {"source", source}});
    }

    stage = "partition";
    const imaging::RasterImage trimmed = imaging::crop_to_even(guidance);
    const imaging::Quadrants quadrants = imaging::partition(trimmed);
    const imaging::CornerAssignment assignment = imaging::shuffle_corners(seed);
    const int pw = quadrants[0].width();
    const int ph = quadrants[0].height();

    stage = "selection";
    if (state.selection) {
      selection = midos::selection_from_json(state.selection->at("selection"));
    } else {
      SelectionInputs in;
      in.guidance = &trimmed;
      in.quadrants = &quadrants;
      in.assignment = &assignment;
      in.pool_embeddings = &pool_embeddings_;
      in.pool_ids = pool_.ids();
      in.embedder = providers_.embedder.get();
      in.case_id = id;
      in.strategy = config_.strategy;
      in.metric = config_.metric;
      in.shuffle_seed = seed;
      selection = select_neutrals(in);
      json corners = json::array();
      for (auto q : assignment.occupants) corners.push_back(imaging::to_string(q));
      journal_->append({{"event", "selection"},
                        {"case_id", id},
                        {"shuffle_seed", seed},
                        {"corners", corners},
                        {"selection", midos::to_json(selection)}});
    }

    stage = "compose";
    const auto layout = make_layout(assignment, selection, pw, ph, config_.gutter_px);
    composite_rel = seed_dir + "/composite.png";
    imaging::RasterImage composite;
    if (auto bytes = verified_artifact(run_dir_, state.composite)) {
      composite = imaging::decode_png(*bytes);
    } else {
      composite = imaging::compose(layout, quadrants, pool_.images);
      const auto png = imaging::encode_png(composite);
      const std::string sha = persist(composite_rel, png);
      journal_->append({{"event", "composite"},
                        {"case_id", id},
                        {"path", composite_rel},
                        {"sha256", sha},
                        {"layout", layout_to_json(layout)}});
    }

    stage = "prompt";
    std::string prompt;
    if (auto bytes = verified_artifact(run_dir_, state.prompt)) {
      prompt.assign(bytes->begin(), bytes->end());
    } else {
      auto it = templates_.find(spec.prompt_template_id);
      if (it == templates_.end()) {
        throw Error(ErrorCode::kIdNotFound, "unknown prompt_template_id '" + spec.prompt_template_id + "'");
      }
      prompt = render_prompt(it->second, layout);
      const std::string rel = seed_dir + "/prompt.txt";
      const std::span<const std::uint8_t> text(reinterpret_cast<const std::uint8_t*>(prompt.data()), prompt.size());
      const std::string sha = persist(rel, text);
      journal_->append({{"event", "prompt"},
                        {"case_id", id},
                        {"path", rel},
                        {"sha256", sha},
                        {"template_id", spec.prompt_template_id}});
    }

    stage = "trial";
    for (int t = 1; t <= spec.trials; ++t) {
      if (recorded.count(t)) continue;
      TrialRecord r = run_trial(spec, seed_dir, composite_rel, selection, composite, prompt, t);
      journal_->append({{"event", "trial"}, {"record", to_json(r)}});
      recorded[t] = true;
      log(id + " trial " + std::to_string(t) + ": " + std::string(to_string(r.outcome)));
    }
  } catch (const std::exception& e) {
    const std::string detail = providers::scrub_secrets(e.what());
    journal_->append({{"event", "case_error"}, {"case_id", id}, {"stage", stage}, {"detail", detail}});
    log(id + " failed at " + stage + ": " + detail);
    for (int t = 1; t <= spec.trials; ++t) {
      if (recorded.count(t)) continue;
      TrialRecord r;
      r.case_id = id;
      r.category = spec.category;
      r.trial_index = t;
      r.composite_path = composite_rel;
      r.selection = selection;
      r.quorum = config_.effective_quorum();
      r.outcome = Outcome::kError;
      r.error_detail = stage + ": " + detail;
      journal_->append({{"event", "trial"}, {"record", to_json(r)}});
    }
  }
  journal_->append({{"event", "case_done"}, {"case_id", id}});
}

json Runner::build_manifest(const CaseStates& states) const {
  json providers_json = {{"target", config_.target.describe()}};
  if (config_.guidance) providers_json["guidance"] = config_.guidance->describe();
  json judges = json::array();
  for (const auto& j : config_.judges) judges.push_back(j.describe());
  providers_json["judges"] = judges;
  if (config_.embedding.kind == semantics::EmbeddingKind::kRemote) {
    providers_json["embedder"] = config_.endpoints.at(config_.embedding.endpoint).describe();
  }

  json cases = json::array();
  json selections = json::array();
  std::size_t done = 0;
  for (const auto& spec : cases_) {
    const std::uint64_t seed = case_seed(config_.seed, spec.case_id);
    json entry = {{"case_id", spec.case_id},
                  {"category", spec.category},
                  {"shuffle_seed", seed},
                  {"trials", spec.trials},
                  {"prompt_template_id", spec.prompt_template_id}};
    auto it = states.find(spec.case_id);
    std::string status = "pending";
    if (it != states.end()) {
      const auto& s = it->second;
      if (s.guidance) entry["guidance_sha256"] = s.guidance->at("sha256");
      if (s.selection) entry["corners"] = s.selection->at("corners");
      if (s.prompt) entry["prompt_sha256"] = s.prompt->at("sha256");
      if (s.error) entry["error_stage"] = s.error->at("stage");
      if (s.done) {
        status = s.error ? "error" : "done";
        ++done;
      }
      if (s.selection) {
        json sel = s.selection->at("selection");
        sel["case_id"] = spec.case_id;
        if (s.composite) sel["composite_sha256"] = s.composite->at("sha256");
        selections.push_back(sel);
      }
    }
    entry["status"] = status;
    cases.push_back(entry);
  }

  return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"config_hash", config_.config_hash},
          {"prng", SplitMix64::name()},
          {"seeds", {{"campaign", config_.seed}, {"overridden", config_.seed_overridden}}},
          {"providers", providers_json},
          {"distance", {{"metric", semantics::to_string(config_.metric)}, {"clamp_epsilon", semantics::kClampEpsilon}}},
          {"resize_filter", kResizeFilter},
          {"embedding",
           {{"kind", semantics::to_string(config_.embedding.kind)}, {"model_tag", providers_.embedder->model_tag()}}},
          {"judge_quorum", config_.effective_quorum()},
          {"distinct_threshold", config_.distinct_threshold},
          {"gutter_px", config_.gutter_px},
          {"inputs",
           {{"dataset_sha256", file_sha_or_empty(config_.dataset_path)},
            {"templates_sha256", file_sha_or_empty(config_.templates_path)},
            {"pool_sha256", file_sha_or_empty(config_.pool_path)}}},
          {"cases", cases},
          {"cases_done", done},
          {"selection", {{"strategy", midos::to_string(config_.strategy)}, {"cases", selections}}}};
}

RunResult Runner::run() {
  if (!providers_.target) throw Error(ErrorCode::kInvalidArgument, "no target provider");
  if (providers_.judges.empty()) throw Error(ErrorCode::kInvalidArgument, "no judges configured");
  if (!providers_.embedder) throw Error(ErrorCode::kInvalidArgument, "no embedder configured");

  cases_ = ingest_dataset(config_.dataset_path);
  templates_ = load_templates(config_.templates_path);
  pool_ = NeutralPool::load(config_.pool_path);
  if (pool_.images.size() < midos::kSlots) {
    throw Error(ErrorCode::kPoolTooSmall, "neutral pool has " + std::to_string(pool_.images.size()) +
                                              " images; at least 5 are required");
  }
  if (config_.strategy == midos::Strategy::kMidos) pool_embeddings_ = embed_pool(pool_, *providers_.embedder);

  fs::create_directories(run_dir_);
  const std::string journal_path = (fs::path(run_dir_) / kJournalFile).string();
  CaseStates states = fs::exists(journal_path) ? replay(Journal::read(journal_path)) : CaseStates{};
  journal_ = std::make_unique<Journal>(journal_path);
  write_file_text((fs::path(run_dir_) / kManifestFile).string(), dump_json(build_manifest(states)));

  const std::size_t limit = std::min(cases_.size(), options_.max_cases.value_or(cases_.size()));
  std::vector<const CaseSpec*> pending;
  for (std::size_t i = 0; i < limit; ++i) {
    auto it = states.find(cases_[i].case_id);
    if (it == states.end() || !it->second.done) pending.push_back(&cases_[i]);
  }
  if (!pending.empty()) log("running " + std::to_string(pending.size()) + " case(s) into " + run_dir_);

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      {
        std::lock_guard lock(fatal_mu);
        if (fatal) return;
      }
      const auto it = states.find(pending[i]->case_id);
      try {
        run_case(*pending[i], it == states.end() ? CaseState{} : it->second);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config_.workers), pending.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  if (n_workers > 0) worker();
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);

  journal_.reset();
  states = replay(Journal::read(journal_path));
  const json manifest = build_manifest(states);
  write_file_text((fs::path(run_dir_) / kManifestFile).string(), dump_json(manifest));

  RunResult result;
  result.run_dir = run_dir_;
  result.cases_total = cases_.size();
  result.cases_done = manifest.at("cases_done").get<std::size_t>();
  result.records = load_trial_records(run_dir_);
  if (result.complete() && !result.records.empty()) {
    result.report = aggregate(result.records, config_.distinct_threshold);
    write_file_text((fs::path(run_dir_) / kReportJson).string(), dump_json(to_json(*result.report)));
    write_file_text((fs::path(run_dir_) / kReportCsv).string(), to_csv(*result.report));
  }
  return result;
}

}  // namespace

ProviderSet make_providers(const CampaignConfig& config, std::shared_ptr<providers::Clock> clock) {
  using namespace providers;
  ProviderSet set;
  if (config.guidance) {
    const auto& e = *config.guidance;
    if (e.kind == "mock") {
      set.guidance = std::make_shared<MockGuidanceProvider>(e, clock);
    } else {
      set.guidance = std::make_shared<HttpGuidanceProvider>(e, http_transport(e), clock);
    }
  }
  if (config.target.kind == "mock") {
    set.target = std::make_shared<ScriptedTargetProvider>(config.target, clock);
  } else {
    set.target = std::make_shared<HttpTargetProvider>(config.target, http_transport(config.target), clock);
  }
  for (const auto& e : config.judges) {
    if (e.kind == "mock") {
      set.judges.push_back(std::make_shared<ScriptedJudgeProvider>(e, clock));
    } else {
      set.judges.push_back(std::make_shared<HttpJudgeProvider>(e, http_transport(e), clock));
    }
  }
  switch (config.embedding.kind) {
    case semantics::EmbeddingKind::kHistogram:
      set.embedder = std::make_shared<semantics::HistogramEmbedder>();
      break;
    case semantics::EmbeddingKind::kFile: {
      auto store = std::make_shared<const semantics::EmbeddingStore>(semantics::store_read(config.embedding.store_path));
      std::shared_ptr<const semantics::Embedder> fallback;
      if (store->model_tag() == semantics::HistogramEmbedder::kModelTag) {
        fallback = std::make_shared<semantics::HistogramEmbedder>();
      }
      set.embedder = std::make_shared<semantics::StoreEmbedder>(store, fallback);
      break;
    }
    case semantics::EmbeddingKind::kRemote: {
      const auto& e = config.endpoints.at(config.embedding.endpoint);
      if (e.kind != "http") throw Error(ErrorCode::kInvalidArgument, "remote embedder endpoint must be http");
      set.embedder = std::make_shared<RemoteEmbedder>(e, http_transport(e), clock, config.embedding_dim);
      break;
    }
  }
  return set;
}

Campaign::Campaign(CampaignConfig config, ProviderSet providers)
    : config_(std::move(config)), providers_(std::move(providers)) {
  config_.validate();
}

RunResult Campaign::run(const RunOptions& options) {
  Runner runner(config_, providers_, options);
  return runner.run();
}

std::vector<TrialRecord> load_trial_records(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / kJournalFile).string();
  std::map<std::pair<std::string, int>, TrialRecord> by_key;
  for (const auto& e : Journal::read(path)) {
    if (e.value("event", "") != "trial") continue;
    TrialRecord r = trial_from_json(e.at("record"));
    auto key = std::make_pair(r.case_id, r.trial_index);
    by_key.insert_or_assign(std::move(key), std::move(r));
  }
  std::vector<TrialRecord> out;
  out.reserve(by_key.size());
  for (auto& [k, r] : by_key) out.push_back(std::move(r));
  return out;
}

CampaignReport recompute_report(const std::string& run_dir) {
  int threshold = kDefaultDistinctThreshold;
  const fs::path manifest_path = fs::path(run_dir) / kManifestFile;
  if (fs::exists(manifest_path)) {
    const json manifest = json::parse(read_file_text(manifest_path.string()), nullptr, false);
    if (!manifest.is_discarded()) threshold = manifest.value("distinct_threshold", threshold);
  }
  const auto records = load_trial_records(run_dir);
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, run_dir + " has no trial records");
  CampaignReport report = aggregate(records, threshold);
  write_file_text((fs::path(run_dir) / kReportJson).string(), dump_json(to_json(report)));
  write_file_text((fs::path(run_dir) / kReportCsv).string(), to_csv(report));
  return report;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace gridprobe::harness
