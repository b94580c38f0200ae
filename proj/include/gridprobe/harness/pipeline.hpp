#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gridprobe/harness/dataset.hpp"
#include "gridprobe/imaging/grid.hpp"
#include "gridprobe/midos/selection.hpp"
#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::harness {

inline constexpr std::string_view kToolName = "gridprobe";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kResizeFilter = "bilinear-half-pixel";

/// Neutral images loaded from a pool manifest.
struct NeutralPool {
  std::vector<PoolEntry> entries;
  imaging::NeutralPatches images;

  static NeutralPool load(const std::string& manifest_path);
  std::vector<std::string> ids() const;
};

/// Per-case shuffle seed: campaign seed XOR fnv1a64(case_id).
std::uint64_t case_seed(std::uint64_t campaign_seed, std::string_view case_id);
/// Seed for the random arm, decorrelated from the shuffle stream.
std::uint64_t random_selection_seed(std::uint64_t shuffle_seed);

/// Store ids for per-case images: "<case_id>#guidance" and "<case_id>#TL" etc.
std::string guidance_embedding_id(std::string_view case_id);
std::string quadrant_embedding_id(std::string_view case_id, imaging::Quadrant q);

/// Embeds every pool image (at native size) in id order, unit-normalized.
std::vector<semantics::Embedding> embed_pool(const NeutralPool& pool, const semantics::Embedder& embedder);

struct SelectionInputs {
  const imaging::RasterImage* guidance = nullptr;  // trimmed to even size
  const imaging::Quadrants* quadrants = nullptr;
  const imaging::CornerAssignment* assignment = nullptr;
  /// Pre-embedded pool; empty for the random strategy.
  const std::vector<semantics::Embedding>* pool_embeddings = nullptr;
  std::vector<std::string> pool_ids;
  const semantics::Embedder* embedder = nullptr;
  std::string case_id;
  midos::Strategy strategy = midos::Strategy::kMidos;
  semantics::DistanceMetric metric = semantics::DistanceMetric::kCosine;
  std::uint64_t shuffle_seed = 0;
};

midos::SelectionResult select_neutrals(const SelectionInputs& in);

imaging::CompositeLayout make_layout(const imaging::CornerAssignment& assignment,
                                     const midos::SelectionResult& selection, int patch_width, int patch_height,
                                     int gutter_px);

nlohmann::json layout_to_json(const imaging::CompositeLayout& layout);
imaging::CompositeLayout layout_from_json(const nlohmann::json& j);

}  // namespace gridprobe::harness
