#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridprobe/imaging/raster.hpp"

namespace gridprobe::imaging {

// Any PNG colour type is accepted; alpha is flattened against white with a
// straight (non gamma-aware) blend. Decode failures throw Error(kDecode).
RasterImage decode_png(std::span<const std::uint8_t> bytes);
RasterImage load_png(const std::string& path);

// Output is a deterministic function of the pixels: no timestamps or text chunks.
std::vector<std::uint8_t> encode_png(const RasterImage& img);
void save_png(const RasterImage& img, const std::string& path);

/// True when the bytes start with the PNG signature.
bool looks_like_png(std::span<const std::uint8_t> bytes);

}  // namespace gridprobe::imaging
