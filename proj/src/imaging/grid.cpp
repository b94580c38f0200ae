#include "gridprobe/imaging/grid.hpp"

#include <algorithm>
#include <set>

#include "gridprobe/common/error.hpp"
#include "gridprobe/common/rng.hpp"

namespace gridprobe::imaging {

namespace {

std::size_t index_of(Quadrant q) { return static_cast<std::size_t>(q); }

// Top-left pixel of quadrant q inside an image of 2*pw x 2*ph.
std::pair<int, int> quadrant_origin(Quadrant q, int pw, int ph) {
  switch (q) {
    case Quadrant::kTopLeft: return {0, 0};
    case Quadrant::kTopRight: return {pw, 0};
    case Quadrant::kBottomLeft: return {0, ph};
    case Quadrant::kBottomRight: return {pw, ph};
  }
  return {0, 0};
}

}  // namespace

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::kTopLeft: return "TL";
    case Quadrant::kTopRight: return "TR";
    case Quadrant::kBottomLeft: return "BL";
    case Quadrant::kBottomRight: return "BR";
  }
  return "?";
}

std::optional<Quadrant> parse_quadrant(std::string_view text) {
  for (Quadrant q : kAllQuadrants) {
    if (to_string(q) == text) return q;
  }
  return std::nullopt;
}

std::string GridCell::label() const { return "a" + std::to_string(row) + std::to_string(col); }

Quadrant CornerAssignment::at(GridCell corner) const {
  for (std::size_t i = 0; i < kCornerCells.size(); ++i) {
    if (kCornerCells[i] == corner) return occupants[i];
  }
  throw Error(ErrorCode::kInvalidArgument, "cell " + corner.label() + " is not a corner");
}

GridCell CornerAssignment::cell_of(Quadrant q) const {
  for (std::size_t i = 0; i < occupants.size(); ++i) {
    if (occupants[i] == q) return kCornerCells[i];
  }
  throw Error(ErrorCode::kInvalidArgument, "corner assignment does not place quadrant " + std::string(to_string(q)));
}

bool CornerAssignment::is_bijection() const noexcept {
  std::array<bool, 4> seen{};
  for (Quadrant q : occupants) {
    const auto i = index_of(q);
    if (i >= 4 || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

const std::string& CompositeLayout::neutral_at(GridCell cell) const {
  for (std::size_t slot = 0; slot < kNeutralSlotCells.size(); ++slot) {
    if (kNeutralSlotCells[slot] == cell) return neutral_ids[slot];
  }
  throw Error(ErrorCode::kInvalidArgument, "cell " + cell.label() + " does not hold a neutral patch");
}

void CompositeLayout::validate() const {
  if (!corners.is_bijection()) throw Error(ErrorCode::kInvalidArgument, "corner assignment is not a bijection");
  if (patch_width < 1 || patch_height < 1) throw Error(ErrorCode::kInvalidArgument, "patch size must be positive");
  if (gutter_px < 0) throw Error(ErrorCode::kInvalidArgument, "gutter must be non-negative");
  std::set<std::string_view> ids;
  for (const auto& id : neutral_ids) {
    if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "layout has an unassigned neutral cell");
    if (!ids.insert(id).second) throw Error(ErrorCode::kDuplicateId, "neutral id '" + id + "' used twice in layout");
  }
}

std::array<CellRect, 9> cell_rects(int patch_width, int patch_height, int gutter_px) {
  std::array<CellRect, 9> rects{};
  std::size_t i = 0;
  for (int row = 1; row <= 3; ++row) {
    for (int col = 1; col <= 3; ++col) {
      rects[i++] = CellRect{GridCell{row, col}, (col - 1) * (patch_width + gutter_px),
                            (row - 1) * (patch_height + gutter_px), patch_width, patch_height};
    }
  }
  return rects;
}

Quadrants partition(const RasterImage& img) {
  if (img.width() < 2 || img.height() < 2) {
    throw Error(ErrorCode::kDimensionTooSmall, "partition needs at least 2x2 pixels, got " +
                                                   std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const RasterImage even = crop_to_even(img);
  const int pw = even.width() / 2;
  const int ph = even.height() / 2;
  Quadrants out;
  for (Quadrant q : kAllQuadrants) {
    const auto [x, y] = quadrant_origin(q, pw, ph);
    out[index_of(q)] = even.crop(x, y, pw, ph);
  }
  return out;
}

CornerAssignment shuffle_corners(std::span<const Quadrant> quadrants, std::uint64_t seed) {
  std::array<Quadrant, 4> order{};
  if (quadrants.size() != order.size()) {
    throw Error(ErrorCode::kInvalidArgument, "shuffle_corners needs exactly four quadrants");
  }
  std::copy(quadrants.begin(), quadrants.end(), order.begin());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw Error(ErrorCode::kInvalidArgument, "shuffle_corners needs four distinct quadrants");
  }
  SplitMix64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  return CornerAssignment{order, seed};
}

CornerAssignment shuffle_corners(std::uint64_t seed) { return shuffle_corners(kAllQuadrants, seed); }

RasterImage compose(const CompositeLayout& layout, const Quadrants& corner_patches,
                    const NeutralPatches& neutral_patches) {
  layout.validate();
  for (Quadrant q : kAllQuadrants) {
    const auto& patch = corner_patches[index_of(q)];
    if (patch.width() != layout.patch_width || patch.height() != layout.patch_height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "corner patch " + std::string(to_string(q)) + " is " + std::to_string(patch.width()) + "x" +
                      std::to_string(patch.height()) + ", layout expects " + std::to_string(layout.patch_width) +
                      "x" + std::to_string(layout.patch_height));
    }
  }
  for (const auto& id : layout.neutral_ids) {
    if (neutral_patches.find(id) == neutral_patches.end()) {
      throw Error(ErrorCode::kMissingPatch, "neutral patch '" + id + "' not supplied");
    }
  }

  RasterImage out = RasterImage::filled(layout.composite_width(), layout.composite_height(), 255, 255, 255);
  for (const CellRect& rect : cell_rects(layout.patch_width, layout.patch_height, layout.gutter_px)) {
    if (rect.cell.is_corner()) {
      out.paste(corner_patches[index_of(layout.corners.at(rect.cell))], rect.x, rect.y);
    } else {
      const auto& src = neutral_patches.find(layout.neutral_at(rect.cell))->second;
      out.paste(resize_bilinear(src, rect.width, rect.height), rect.x, rect.y);
    }
  }
  return out;
}

RasterImage reassemble_corners(const RasterImage& composite, const CornerAssignment& assignment, int gutter_px) {
  if (!assignment.is_bijection()) throw Error(ErrorCode::kInvalidArgument, "corner assignment is not a bijection");
  const int inner_w = composite.width() - 2 * gutter_px;
  const int inner_h = composite.height() - 2 * gutter_px;
  if (inner_w <= 0 || inner_h <= 0 || inner_w % 3 != 0 || inner_h % 3 != 0) {
    throw Error(ErrorCode::kDimensionNotDivisible, "composite " + std::to_string(composite.width()) + "x" +
                                                       std::to_string(composite.height()) +
                                                       " does not split into a 3x3 grid");
  }
  const int pw = inner_w / 3;
  const int ph = inner_h / 3;
  RasterImage out(2 * pw, 2 * ph);
  for (std::size_t i = 0; i < kCornerCells.size(); ++i) {
    const GridCell cell = kCornerCells[i];
    const RasterImage patch =
        composite.crop((cell.col - 1) * (pw + gutter_px), (cell.row - 1) * (ph + gutter_px), pw, ph);
    const auto [x, y] = quadrant_origin(assignment.occupants[i], pw, ph);
    out.paste(patch, x, y);
  }
  return out;
}

}  // namespace gridprobe::imaging
