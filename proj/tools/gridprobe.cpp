// gridprobe: command-line driver for the composite-probe pipeline.
//
//   gridprobe embed    --pool pool.jsonl --out embeddings.jsonl
//   gridprobe select   --guidance g.png --pool pool.jsonl [--embeddings e.jsonl]
//   gridprobe compose  --guidance g.png --pool pool.jsonl --seed 42 --out out/
//   gridprobe campaign --config campaign.toml [--strategy random --run-id ablation]
//   gridprobe report   --run runs/demo
//   gridprobe verify
//
// Exit codes: 0 ok, 1 validation or usage error, 2 provider failure.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"
#include "gridprobe/common/rng.hpp"
#include "gridprobe/harness/campaign.hpp"
#include "gridprobe/harness/config.hpp"
#include "gridprobe/harness/pipeline.hpp"
#include "gridprobe/harness/report.hpp"
#include "gridprobe/imaging/grid.hpp"
#include "gridprobe/imaging/png_io.hpp"
#include "gridprobe/midos/oracle.hpp"
#include "gridprobe/midos/selection.hpp"
#include "gridprobe/providers/adapters.hpp"
#include "gridprobe/providers/transport.hpp"
#include "gridprobe/semantics/histogram.hpp"
#include "gridprobe/semantics/store.hpp"

namespace fs = std::filesystem;
namespace gp = gridprobe;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  int verbosity = 0;
  std::optional<std::uint64_t> seed_override;
  std::string output_dir;
};

void note(const GlobalOptions& g, const std::string& line) {
  if (g.verbosity > 0) std::cerr << line << '\n';
}

gp::midos::Strategy strategy_from(const std::string& name) {
  auto s = gp::midos::parse_strategy(name);
  if (!s) throw gp::Error(gp::ErrorCode::kInvalidArgument, "strategy must be midos or random");
  return *s;
}

gp::semantics::DistanceMetric metric_from(const std::string& name) {
  auto m = gp::semantics::parse_distance_metric(name);
  if (!m) throw gp::Error(gp::ErrorCode::kInvalidArgument, "distance must be cosine or euclidean");
  return *m;
}

std::string sha_of_file(const std::string& path) { return gp::sha256_hex(gp::read_file_bytes(path)); }

// Embedder for embed/select/compose: a precomputed store (with the built-in
// featurizer as fallback when tags agree), a remote endpoint from --config,
// or the built-in featurizer.
std::shared_ptr<const gp::semantics::Embedder> make_embedder(const GlobalOptions& g, const std::string& store_path,
                                                             const std::string& remote) {
  if (!remote.empty()) {
    if (g.config_path.empty()) throw gp::Error(gp::ErrorCode::kInvalidArgument, "--remote needs --config");
    auto config = gp::harness::load_campaign_config(g.config_path);
    auto it = config.endpoints.find(remote);
    if (it == config.endpoints.end()) {
      throw gp::Error(gp::ErrorCode::kInvalidArgument, "no provider named '" + remote + "' in " + g.config_path);
    }
    auto transport = std::make_shared<gp::providers::HttpTransport>(it->second.base_url, it->second.timeout_s);
    return std::make_shared<gp::providers::RemoteEmbedder>(it->second, transport,
                                                           std::make_shared<gp::providers::SteadyClock>(),
                                                           config.embedding_dim);
  }
  if (!store_path.empty()) {
    auto store = std::make_shared<const gp::semantics::EmbeddingStore>(gp::semantics::store_read(store_path));
    std::shared_ptr<const gp::semantics::Embedder> fallback;
    if (store->model_tag() == gp::semantics::HistogramEmbedder::kModelTag) {
      fallback = std::make_shared<gp::semantics::HistogramEmbedder>();
    }
    return std::make_shared<gp::semantics::StoreEmbedder>(store, fallback);
  }
  return std::make_shared<gp::semantics::HistogramEmbedder>();
}

struct ComposeArgs {
  std::string guidance;
  std::string pool;
  std::string embeddings;
  std::string remote;
  std::string strategy = "midos";
  std::string distance = "cosine";
  std::string case_id = "cli";
  std::string out;
  int gutter_px = 0;
  bool as_json = false;
};

struct Built {
  gp::imaging::RasterImage trimmed;
  gp::imaging::Quadrants quadrants;
  gp::imaging::CornerAssignment assignment;
  gp::midos::SelectionResult selection;
  std::string model_tag;
};

Built build_selection(const GlobalOptions& g, const ComposeArgs& a, const gp::harness::NeutralPool& pool,
                      std::uint64_t seed) {
  if (pool.images.size() < gp::midos::kSlots) {
    throw gp::Error(gp::ErrorCode::kPoolTooSmall, "pool has " + std::to_string(pool.images.size()) +
                                                      " images; at least 5 are required");
  }
  const auto strategy = strategy_from(a.strategy);
  auto embedder = make_embedder(g, a.embeddings, a.remote);
  Built b;
  b.trimmed = gp::imaging::crop_to_even(gp::imaging::load_png(a.guidance));
  b.quadrants = gp::imaging::partition(b.trimmed);
  b.assignment = gp::imaging::shuffle_corners(seed);
  b.model_tag = embedder->model_tag();

  std::vector<gp::semantics::Embedding> pool_embeddings;
  if (strategy == gp::midos::Strategy::kMidos) pool_embeddings = gp::harness::embed_pool(pool, *embedder);
  gp::harness::SelectionInputs in;
  in.guidance = &b.trimmed;
  in.quadrants = &b.quadrants;
  in.assignment = &b.assignment;
  in.pool_embeddings = &pool_embeddings;
  in.pool_ids = pool.ids();
  in.embedder = embedder.get();
  in.case_id = a.case_id;
  in.strategy = strategy;
  in.metric = metric_from(a.distance);
  in.shuffle_seed = seed;
  b.selection = gp::harness::select_neutrals(in);
  return b;
}

int cmd_embed(const GlobalOptions& g, const std::string& pool_path, const std::string& out, const std::string& remote) {
  const auto pool = gp::harness::NeutralPool::load(pool_path);
  auto embedder = make_embedder(g, "", remote);
  std::vector<gp::semantics::Embedding> embeddings = gp::harness::embed_pool(pool, *embedder);
  if (embeddings.empty()) throw gp::Error(gp::ErrorCode::kInvalidArgument, "pool is empty");
  gp::semantics::EmbeddingStore store(embedder->model_tag(), embeddings.front().dim());
  for (auto& e : embeddings) store.insert(std::move(e));
  gp::semantics::store_write(store, out);

  json manifest = {{"tool", {{"name", gp::harness::kToolName}, {"version", gp::harness::kToolVersion}}},
                   {"command", "embed"},
                   {"config_hash", g.config_path.empty() ? json() : json(sha_of_file(g.config_path))},
                   {"prng", gp::SplitMix64::name()},
                   {"seeds", json::object()},
                   {"embedding", {{"model_tag", store.model_tag()}, {"dim", store.dim()}, {"count", store.size()}}},
                   {"resize_filter", gp::harness::kResizeFilter},
                   {"inputs", {{"pool_sha256", sha_of_file(pool_path)}}},
                   {"output_sha256", sha_of_file(out)}};
  gp::write_file_text(out + ".manifest.json", gp::harness::dump_json(manifest));
  std::cout << "wrote " << store.size() << " embeddings (" << store.model_tag() << ", dim " << store.dim() << ") to "
            << out << '\n';
  return 0;
}

int cmd_select(const GlobalOptions& g, const ComposeArgs& a) {
  const auto pool = gp::harness::NeutralPool::load(a.pool);
  const std::uint64_t seed = g.seed_override.value_or(0);
  const auto b = build_selection(g, a, pool, seed);
  if (a.as_json) {
    std::cout << gp::harness::dump_json(gp::midos::to_json(b.selection));
  } else {
    std::cout << gp::midos::format_selection_table(b.selection);
  }
  return 0;
}

int cmd_compose(const GlobalOptions& g, const ComposeArgs& a) {
  const auto pool = gp::harness::NeutralPool::load(a.pool);
  const std::uint64_t seed = g.seed_override.value_or(0);
  const auto b = build_selection(g, a, pool, seed);
  const auto layout = gp::harness::make_layout(b.assignment, b.selection, b.quadrants[0].width(),
                                               b.quadrants[0].height(), a.gutter_px);
  const auto composite = gp::imaging::compose(layout, b.quadrants, pool.images);

  const fs::path out = a.out.empty() ? fs::path(g.output_dir.empty() ? "." : g.output_dir) : fs::path(a.out);
  const auto png = gp::imaging::encode_png(composite);
  gp::write_file_bytes((out / "composite.png").string(), png);
  json layout_json = {{"layout", gp::harness::layout_to_json(layout)}, {"selection", gp::midos::to_json(b.selection)}};
  gp::write_file_text((out / "layout.json").string(), gp::harness::dump_json(layout_json));

  json inputs = {{"guidance_sha256", sha_of_file(a.guidance)}, {"pool_sha256", sha_of_file(a.pool)}};
  if (!a.embeddings.empty()) inputs["embeddings_sha256"] = sha_of_file(a.embeddings);
  json manifest = {
      {"tool", {{"name", gp::harness::kToolName}, {"version", gp::harness::kToolVersion}}},
      {"command", "compose"},
      {"config_hash", g.config_path.empty() ? json() : json(sha_of_file(g.config_path))},
      {"prng", gp::SplitMix64::name()},
      {"seeds", {{"shuffle", seed}, {"overridden", g.seed_override.has_value()}}},
      {"providers", json::object()},
      {"distance", {{"metric", a.distance}, {"clamp_epsilon", gp::semantics::kClampEpsilon}}},
      {"resize_filter", gp::harness::kResizeFilter},
      {"embedding", {{"model_tag", b.model_tag}}},
      {"inputs", inputs},
      {"composite_sha256", gp::sha256_hex(png)},
      {"selection", gp::midos::to_json(b.selection)}};
  gp::write_file_text((out / "manifest.json").string(), gp::harness::dump_json(manifest));
  std::cout << "wrote " << (out / "composite.png").string() << " (" << composite.width() << "x" << composite.height()
            << ")\n";
  note(g, gp::midos::format_selection_table(b.selection));
  return 0;
}

int cmd_campaign(const GlobalOptions& g, const std::string& strategy, const std::string& run_id,
                 std::optional<std::size_t> max_cases) {
  if (g.config_path.empty()) throw gp::Error(gp::ErrorCode::kInvalidArgument, "campaign needs --config");
  auto config = gp::harness::load_campaign_config(g.config_path);
  if (!strategy.empty()) config.strategy = strategy_from(strategy);
  if (!run_id.empty()) config.run_id = run_id;
  if (!g.output_dir.empty()) config.output_dir = g.output_dir;
  if (g.seed_override) {
    config.seed = *g.seed_override;
    config.seed_overridden = true;
  }
  config.validate();
  auto providers = gp::harness::make_providers(config, std::make_shared<gp::providers::SteadyClock>());
  gp::harness::Campaign campaign(config, std::move(providers));
  gp::harness::RunOptions options;
  options.max_cases = max_cases;
  if (g.verbosity > 0) options.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const auto result = campaign.run(options);
  std::cout << result.run_dir << ": " << result.cases_done << "/" << result.cases_total << " cases done\n";
  if (result.report) std::cout << gp::harness::to_csv(*result.report);
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
  if (runs.size() == 1 && out.empty()) {
    std::cout << gp::harness::to_csv(gp::harness::recompute_report(runs.front()));
    return 0;
  }
  // Several runs (e.g. both ablation arms): one combined report.
  std::vector<gp::harness::TrialRecord> records;
  for (const auto& run : runs) {
    auto r = gp::harness::load_trial_records(run);
    records.insert(records.end(), r.begin(), r.end());
  }
  if (records.empty()) throw gp::Error(gp::ErrorCode::kInvalidArgument, "no trial records found");
  const auto report = gp::harness::aggregate(records);
  if (!out.empty()) {
    gp::write_file_text((fs::path(out) / gp::harness::kReportJson).string(),
                        gp::harness::dump_json(gp::harness::to_json(report)));
    gp::write_file_text((fs::path(out) / gp::harness::kReportCsv).string(), gp::harness::to_csv(report));
  }
  std::cout << gp::harness::to_csv(report);
  return 0;
}

// Self-checks: corner reassembly on random images and MIDOS against the
// brute-force oracle on random contexts.
int cmd_verify(std::uint64_t seed, int iterations) {
  gp::SplitMix64 rng(seed);
  int roundtrip_failures = 0;
  for (int i = 0; i < iterations; ++i) {
    const int w = 2 * (1 + static_cast<int>(rng.below(24)));
    const int h = 2 * (1 + static_cast<int>(rng.below(24)));
    gp::imaging::RasterImage img(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(rng.below(256));
      }
    }
    gp::imaging::CompositeLayout layout;
    layout.corners = gp::imaging::shuffle_corners(rng.next());
    layout.patch_width = w / 2;
    layout.patch_height = h / 2;
    gp::imaging::NeutralPatches neutrals;
    for (int k = 0; k < 5; ++k) {
      layout.neutral_ids[k] = "n" + std::to_string(k);
      neutrals.emplace(layout.neutral_ids[k], gp::imaging::RasterImage::filled(3, 3, 40, 80, 120));
    }
    const auto composite = gp::imaging::compose(layout, gp::imaging::partition(img), neutrals);
    if (!(gp::imaging::reassemble_corners(composite, layout.corners) == img)) ++roundtrip_failures;
  }

  int oracle_failures = 0;
  constexpr std::size_t kDim = 6;
  auto unit = [&](std::string id) {
    gp::semantics::Embedding e{std::move(id), "verify", std::vector<double>(kDim)};
    for (auto& x : e.v) x = static_cast<double>(rng.below(2001)) / 1000.0 - 1.0;
    e.v[0] += 1e-3;
    return gp::semantics::normalized(std::move(e));
  };
  for (int i = 0; i < iterations; ++i) {
    gp::midos::SelectionContext ctx;
    ctx.guidance = unit("guidance");
    for (auto& c : ctx.corners) c = unit("corner");
    const std::size_t n = 5 + rng.below(8);
    for (std::size_t k = 0; k < n; ++k) ctx.pool.push_back(unit("p" + std::to_string(k)));
    // A duplicated vector under another id forces exact ties.
    auto twin = ctx.pool[rng.below(n)];
    twin.id = "t" + std::to_string(i);
    ctx.pool.push_back(twin);
    if (!(gp::midos::select_midos(ctx) == gp::midos::oracle_select(ctx))) ++oracle_failures;
  }

  std::cout << (roundtrip_failures == 0 ? "PASS" : "FAIL") << " reassembly round-trip (" << iterations
            << " images, " << roundtrip_failures << " mismatches)\n";
  std::cout << (oracle_failures == 0 ? "PASS" : "FAIL") << " MIDOS matches oracle (" << iterations << " contexts, "
            << oracle_failures << " mismatches)\n";
  return roundtrip_failures == 0 && oracle_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridprobe: grid-composite probes for multimodal model safety evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Campaign TOML file")->check(CLI::ExistingFile);
  app.add_flag("-v,--verbose", g.verbosity, "More output on stderr (repeatable)");
  app.add_option("--seed", g.seed_override, "Seed; overrides the config and is recorded in the manifest");
  app.add_option("--output-dir", g.output_dir, "Where runs and outputs go");

  ComposeArgs a;
  auto add_selection_options = [&](CLI::App* sub) {
    sub->add_option("--guidance", a.guidance, "Guidance image (PNG)")->required()->check(CLI::ExistingFile);
    sub->add_option("--pool", a.pool, "Neutral pool manifest (NDJSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--embeddings", a.embeddings, "Precomputed embedding store")->check(CLI::ExistingFile);
    sub->add_option("--remote", a.remote, "Remote encoder endpoint name from --config");
    sub->add_option("--strategy", a.strategy, "midos or random")->check(CLI::IsMember({"midos", "random"}));
    sub->add_option("--distance", a.distance, "cosine or euclidean")->check(CLI::IsMember({"cosine", "euclidean"}));
    sub->add_option("--case-id", a.case_id, "Id prefix for guidance and corner embedding lookups");
  };

  std::string embed_pool;
  std::string embed_out;
  auto* embed = app.add_subcommand("embed", "Embed a neutral pool into an embedding store");
  embed->add_option("--pool", embed_pool, "Neutral pool manifest (NDJSON)")->required()->check(CLI::ExistingFile);
  embed->add_option("--out", embed_out, "Output store (NDJSON)")->required();
  embed->add_option("--remote", a.remote, "Remote encoder endpoint name from --config");

  auto* select = app.add_subcommand("select", "Print the neutral-patch selection with its score table");
  add_selection_options(select);
  select->add_flag("--json", a.as_json, "Print JSON instead of a table");

  auto* compose = app.add_subcommand("compose", "Build the 3x3 composite and its layout");
  add_selection_options(compose);
  compose->add_option("--out", a.out, "Output directory");
  compose->add_option("--gutter", a.gutter_px, "White separator width in pixels")->check(CLI::Range(0, 4096));

  std::string campaign_strategy;
  std::string run_id;
  std::optional<std::size_t> max_cases;
  auto* campaign = app.add_subcommand("campaign", "Run or resume a full campaign");
  campaign->add_option("--strategy", campaign_strategy, "Override the configured strategy")
      ->check(CLI::IsMember({"midos", "random"}));
  campaign->add_option("--run-id", run_id, "Override the configured run id");
  campaign->add_option("--max-cases", max_cases, "Stop after the first N dataset cases (resume later)");

  std::vector<std::string> runs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Recompute the report from run directories");
  report->add_option("--run", runs, "Run directory (repeat to combine arms)")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "Write report.json/report.csv here");

  int iterations = 200;
  auto* verify = app.add_subcommand("verify", "Run the reassembly and MIDOS-oracle self-checks");
  verify->add_option("--iterations", iterations, "Cases per check")->check(CLI::Range(1, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*embed) return cmd_embed(g, embed_pool, embed_out, a.remote);
    if (*select) return cmd_select(g, a);
    if (*compose) return cmd_compose(g, a);
    if (*campaign) return cmd_campaign(g, campaign_strategy, run_id, max_cases);
    if (*report) return cmd_report(runs, report_out);
    if (*verify) return cmd_verify(g.seed_override.value_or(0x5eed), iterations);
  } catch (const gp::Error& e) {
    std::cerr << "error [" << gp::to_string(e.code()) << "]: " << gp::providers::scrub_secrets(e.what()) << '\n';
    return gp::is_provider_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << gp::providers::scrub_secrets(e.what()) << '\n';
    return 1;
  }
  return 1;
}
