#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gridprobe/imaging/raster.hpp"

namespace gridprobe::imaging {

/// Original position of a guidance-image quadrant.
enum class Quadrant : std::uint8_t { kTopLeft = 0, kTopRight = 1, kBottomLeft = 2, kBottomRight = 3 };

inline constexpr std::array<Quadrant, 4> kAllQuadrants = {Quadrant::kTopLeft, Quadrant::kTopRight,
                                                          Quadrant::kBottomLeft, Quadrant::kBottomRight};

std::string_view to_string(Quadrant q);
std::optional<Quadrant> parse_quadrant(std::string_view text);

/// 1-based position in the 3x3 grid.
struct GridCell {
  int row = 1;
  int col = 1;

  bool is_corner() const noexcept { return (row == 1 || row == 3) && (col == 1 || col == 3); }
  /// Matrix-style label, e.g. "a13".
  std::string label() const;

  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

/// Corner cells in the order whose occupants are called f_a, f_b, f_c, f_d.
inline constexpr std::array<GridCell, 4> kCornerCells = {GridCell{1, 1}, GridCell{1, 3}, GridCell{3, 1},
                                                         GridCell{3, 3}};

/// Cell receiving neutral slot n1..n5. The centre takes n1; each edge cell
/// takes the slot whose penalty pairs its two flanking corners.
inline constexpr std::array<GridCell, 5> kNeutralSlotCells = {GridCell{2, 2}, GridCell{1, 2}, GridCell{2, 3},
                                                              GridCell{3, 2}, GridCell{2, 1}};

/// Quadrant patches indexed by static_cast<size_t>(Quadrant).
using Quadrants = std::array<RasterImage, 4>;

using NeutralPatches = std::map<std::string, RasterImage, std::less<>>;

/// Bijection from the four corner cells to quadrants.
struct CornerAssignment {
  /// occupants[i] sits in kCornerCells[i].
  std::array<Quadrant, 4> occupants = kAllQuadrants;
  std::uint64_t seed = 0;

  static CornerAssignment identity() { return {}; }

  Quadrant at(GridCell corner) const;
  GridCell cell_of(Quadrant q) const;
  /// True when occupants is a permutation of the four quadrants.
  bool is_bijection() const noexcept;

  friend bool operator==(const CornerAssignment&, const CornerAssignment&) = default;
};

struct CompositeLayout {
  CornerAssignment corners;
  /// Neutral image id for slot n1..n5; placed at kNeutralSlotCells[slot].
  std::array<std::string, 5> neutral_ids;
  int patch_width = 0;
  int patch_height = 0;
  /// White separator between cells. Zero reproduces a gapless grid.
  int gutter_px = 0;

  int composite_width() const noexcept { return 3 * patch_width + 2 * gutter_px; }
  int composite_height() const noexcept { return 3 * patch_height + 2 * gutter_px; }

  /// Neutral id at a non-corner cell.
  const std::string& neutral_at(GridCell cell) const;

  /// Throws on a non-bijective corner map, duplicate/empty ids, or bad sizes.
  void validate() const;

  friend bool operator==(const CompositeLayout&, const CompositeLayout&) = default;
};

struct CellRect {
  GridCell cell;
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

/// Pixel rectangles of all nine cells in row-major order.
std::array<CellRect, 9> cell_rects(int patch_width, int patch_height, int gutter_px = 0);

/// Splits an image into four equal quadrants after trimming to even size.
/// Throws Error(kDimensionTooSmall) if either side is below 2.
Quadrants partition(const RasterImage& img);

/// Uniform random bijection over the 24 corner permutations (Fisher-Yates
/// driven by SplitMix64). A pure function of seed.
CornerAssignment shuffle_corners(std::span<const Quadrant> quadrants, std::uint64_t seed);
CornerAssignment shuffle_corners(std::uint64_t seed);

/// Builds the 3x3 composite. Neutral patches are stretched to patch size.
RasterImage compose(const CompositeLayout& layout, const Quadrants& corner_patches,
                    const NeutralPatches& neutral_patches);

/// Extracts the corner cells and returns them to their original positions,
/// yielding the trimmed guidance image.
RasterImage reassemble_corners(const RasterImage& composite, const CornerAssignment& assignment,
                               int gutter_px = 0);

}  // namespace gridprobe::imaging
