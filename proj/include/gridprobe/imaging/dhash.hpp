#pragma once

#include <bit>
#include <cstdint>

#include "gridprobe/imaging/raster.hpp"

namespace gridprobe::imaging {

/// Difference hash: box-downsample to 9x8 luma, then bit (row*8 + col) is set
/// when cell (col) is darker than cell (col+1) in that row. Flat images hash
/// to 0 regardless of their colour.
std::uint64_t perceptual_hash(const RasterImage& img);

inline int hamming_distance(std::uint64_t a, std::uint64_t b) noexcept { return std::popcount(a ^ b); }

}  // namespace gridprobe::imaging
