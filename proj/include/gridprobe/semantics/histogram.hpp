#pragma once

#include <string>

#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::semantics {

/// Built-in offline featurizer (128 dims):
///   [0, 64)   4x4x4 RGB colour histogram, bin = (r>>6)*16 + (g>>6)*4 + (b>>6)
///   [64, 128) 8x8 box-downsampled luma
/// Each block is L2-normalized on its own (an all-zero block stays zero), then
/// the concatenation is normalized. Colour content is order-free; luma only
/// depends on which downsample cell a pixel falls in.
class HistogramEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kColorBins = 64;
  static constexpr std::size_t kLumaCells = 64;
  static constexpr std::size_t kDim = kColorBins + kLumaCells;
  static constexpr const char* kModelTag = "rgbhist444-luma8x8-v1";

  std::string model_tag() const override { return kModelTag; }
  Embedding embed(const imaging::RasterImage& img, std::string_view id) const override;
};

}  // namespace gridprobe::semantics
