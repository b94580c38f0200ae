#include "gridprobe/semantics/histogram.hpp"

#include <cmath>
#include <span>

namespace gridprobe::semantics {

namespace {

void normalize_block(std::span<double> block) {
  double sq = 0.0;
  for (double x : block) sq += x * x;
  if (sq == 0.0) return;
  const double norm = std::sqrt(sq);
  for (double& x : block) x /= norm;
}

}  // namespace

Embedding HistogramEmbedder::embed(const imaging::RasterImage& img, std::string_view id) const {
  std::vector<double> v(kDim, 0.0);

  std::vector<std::uint64_t> counts(kColorBins, 0);
  const auto px = img.pixels();
  for (std::size_t i = 0; i + 2 < px.size(); i += 3) {
    ++counts[static_cast<std::size_t>((px[i] >> 6) * 16 + (px[i + 1] >> 6) * 4 + (px[i + 2] >> 6))];
  }
  const double total = static_cast<double>(img.width()) * img.height();
  for (std::size_t b = 0; b < kColorBins; ++b) v[b] = static_cast<double>(counts[b]) / total;

  const auto luma = imaging::gray_downsample(img, 8, 8);
  for (std::size_t i = 0; i < kLumaCells; ++i) v[kColorBins + i] = luma[i] / 255.0;

  auto all = std::span<double>(v);
  normalize_block(all.subspan(0, kColorBins));
  normalize_block(all.subspan(kColorBins, kLumaCells));
  normalize_block(all);
  return Embedding{std::string(id), kModelTag, std::move(v)};
}

}  // namespace gridprobe::semantics
