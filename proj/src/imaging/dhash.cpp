#include "gridprobe/imaging/dhash.hpp"

#include <vector>

namespace gridprobe::imaging {

std::uint64_t perceptual_hash(const RasterImage& img) {
  constexpr int kCols = 9;
  constexpr int kRows = 8;
  const std::vector<double> luma = gray_downsample(img, kCols, kRows);
  std::uint64_t hash = 0;
  for (int row = 0; row < kRows; ++row) {
    for (int col = 0; col < kCols - 1; ++col) {
      const double left = luma[static_cast<std::size_t>(row * kCols + col)];
      const double right = luma[static_cast<std::size_t>(row * kCols + col + 1)];
      if (left < right) hash |= std::uint64_t{1} << (row * 8 + col);
    }
  }
  return hash;
}

}  // namespace gridprobe::imaging
