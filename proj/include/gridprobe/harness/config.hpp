#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gridprobe/midos/selection.hpp"
#include "gridprobe/providers/endpoint.hpp"
#include "gridprobe/providers/judging.hpp"
#include "gridprobe/semantics/distance.hpp"
#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::harness {

/// Everything a campaign run needs. Relative paths in the TOML file are
/// resolved against the file's directory.
struct CampaignConfig {
  std::string config_path;
  std::string config_hash;  // SHA-256 of the config file bytes

  std::string dataset_path;
  std::string templates_path;
  std::string pool_path;

  semantics::EmbeddingProviderSpec embedding;
  std::optional<std::size_t> embedding_dim;  // remote encoders only

  midos::Strategy strategy = midos::Strategy::kMidos;
  std::uint64_t seed = 0;
  bool seed_overridden = false;
  int workers = 1;
  /// Minimum judge verdicts for an image trial. 0 means "every judge".
  int judge_quorum = 0;
  semantics::DistanceMetric metric = semantics::DistanceMetric::kCosine;
  int gutter_px = 0;
  int distinct_threshold = 10;

  std::string output_dir = "runs";
  std::string run_id;

  std::optional<providers::ProviderEndpoint> guidance;
  providers::ProviderEndpoint target;
  std::vector<providers::ProviderEndpoint> judges;
  /// Other named endpoints, e.g. a remote encoder referenced by embedding.endpoint.
  std::map<std::string, providers::ProviderEndpoint> endpoints;
  providers::JudgingTemplate judging;

  int effective_quorum() const noexcept;
  std::string run_dir() const;

  /// Throws Error(kInvalidArgument) on inconsistent settings.
  void validate() const;
};

/// Parses TOML text. Unknown keys are rejected so typos surface early, and
/// anything that looks like an inline credential is refused: secrets are
/// referenced only through auth_env.
CampaignConfig parse_campaign_config(std::string_view text, const std::string& base_dir,
                                     const std::string& source = "config");
CampaignConfig load_campaign_config(const std::string& path);

}  // namespace gridprobe::harness
