#include "gridprobe/harness/pipeline.hpp"

#include "gridprobe/common/error.hpp"
#include "gridprobe/common/rng.hpp"
#include "gridprobe/imaging/png_io.hpp"

namespace gridprobe::harness {

using nlohmann::json;

NeutralPool NeutralPool::load(const std::string& manifest_path) {
  NeutralPool pool;
  pool.entries = load_pool_manifest(manifest_path);
  for (const auto& e : pool.entries) pool.images.emplace(e.id, imaging::load_png(e.path));
  return pool;
}

std::vector<std::string> NeutralPool::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, img] : images) out.push_back(id);
  return out;
}

std::uint64_t case_seed(std::uint64_t campaign_seed, std::string_view case_id) {
  return campaign_seed ^ fnv1a64(case_id);
}

std::uint64_t random_selection_seed(std::uint64_t shuffle_seed) { return shuffle_seed ^ 0x9e3779b97f4a7c15ULL; }

std::string guidance_embedding_id(std::string_view case_id) { return std::string(case_id) + "#guidance"; }

std::string quadrant_embedding_id(std::string_view case_id, imaging::Quadrant q) {
  return std::string(case_id) + "#" + std::string(imaging::to_string(q));
}

std::vector<semantics::Embedding> embed_pool(const NeutralPool& pool, const semantics::Embedder& embedder) {
  std::vector<semantics::Embedding> out;
  out.reserve(pool.images.size());
  for (const auto& [id, img] : pool.images) out.push_back(semantics::normalized(embedder.embed(img, id)));
  return out;
}

midos::SelectionResult select_neutrals(const SelectionInputs& in) {
  if (in.strategy == midos::Strategy::kRandom) {
    return midos::select_random(in.pool_ids, random_selection_seed(in.shuffle_seed));
  }
  if (!in.guidance || !in.quadrants || !in.assignment || !in.pool_embeddings || !in.embedder) {
    throw Error(ErrorCode::kInvalidArgument, "MIDOS selection needs guidance, corners, pool and an embedder");
  }
  midos::SelectionContext ctx;
  ctx.metric = in.metric;
  ctx.guidance = semantics::normalized(in.embedder->embed(*in.guidance, guidance_embedding_id(in.case_id)));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto q = in.assignment->occupants[i];
    ctx.corners[i] = semantics::normalized(
        in.embedder->embed((*in.quadrants)[static_cast<std::size_t>(q)], quadrant_embedding_id(in.case_id, q)));
  }
  ctx.pool = *in.pool_embeddings;
  return midos::select_midos(ctx);
}

imaging::CompositeLayout make_layout(const imaging::CornerAssignment& assignment,
                                     const midos::SelectionResult& selection, int patch_width, int patch_height,
                                     int gutter_px) {
  imaging::CompositeLayout layout;
  layout.corners = assignment;
  layout.neutral_ids = selection.ids;
  layout.patch_width = patch_width;
  layout.patch_height = patch_height;
  layout.gutter_px = gutter_px;
  layout.validate();
  return layout;
}

json layout_to_json(const imaging::CompositeLayout& layout) {
  json corners = json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    corners.push_back({{"cell", imaging::kCornerCells[i].label()},
                       {"quadrant", imaging::to_string(layout.corners.occupants[i])}});
  }
  json neutrals = json::array();
  for (std::size_t k = 0; k < layout.neutral_ids.size(); ++k) {
    neutrals.push_back({{"slot", "n" + std::to_string(k + 1)},
                        {"cell", imaging::kNeutralSlotCells[k].label()},
                        {"id", layout.neutral_ids[k]}});
  }
  return {{"corners", corners},
          {"neutrals", neutrals},
          {"shuffle_seed", layout.corners.seed},
          {"patch_width", layout.patch_width},
          {"patch_height", layout.patch_height},
          {"gutter_px", layout.gutter_px},
          {"composite_width", layout.composite_width()},
          {"composite_height", layout.composite_height()}};
}

imaging::CompositeLayout layout_from_json(const json& j) {
  try {
    imaging::CompositeLayout layout;
    const auto& corners = j.at("corners");
    if (corners.size() != 4) throw Error(ErrorCode::kParse, "layout needs four corners");
    for (std::size_t i = 0; i < 4; ++i) {
      auto q = imaging::parse_quadrant(corners[i].at("quadrant").get<std::string>());
      if (!q) throw Error(ErrorCode::kParse, "unknown quadrant in layout");
      layout.corners.occupants[i] = *q;
    }
    layout.corners.seed = j.at("shuffle_seed").get<std::uint64_t>();
    const auto& neutrals = j.at("neutrals");
    if (neutrals.size() != 5) throw Error(ErrorCode::kParse, "layout needs five neutral slots");
    for (std::size_t k = 0; k < 5; ++k) layout.neutral_ids[k] = neutrals[k].at("id").get<std::string>();
    layout.patch_width = j.at("patch_width").get<int>();
    layout.patch_height = j.at("patch_height").get<int>();
    layout.gutter_px = j.value("gutter_px", 0);
    layout.validate();
    return layout;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("layout: ") + e.what());
  }
}

}  // namespace gridprobe::harness
