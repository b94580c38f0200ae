#include "gridprobe/imaging/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridprobe/common/error.hpp"

namespace gridprobe::imaging {

namespace {

std::size_t buffer_size(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
  }
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * RasterImage::kChannels;
}

// Integer cell bounds [lo, hi) of cell i when splitting `extent` pixels into `cells`.
// Always non-empty, even when the image is smaller than the grid.
std::pair<int, int> cell_bounds(int i, int cells, int extent) {
  int lo = static_cast<int>(static_cast<long long>(i) * extent / cells);
  int hi = static_cast<int>(static_cast<long long>(i + 1) * extent / cells);
  if (hi <= lo) hi = lo + 1;
  return {std::min(lo, extent - 1), std::min(hi, extent)};
}

}  // namespace

RasterImage::RasterImage(int width, int height)
    : width_(width), height_(height), pixels_(buffer_size(width, height), 0) {}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != buffer_size(width, height)) {
    throw Error(ErrorCode::kDimensionMismatch, "pixel buffer holds " + std::to_string(pixels_.size()) +
                                                   " bytes, expected " +
                                                   std::to_string(buffer_size(width, height)));
  }
}

RasterImage RasterImage::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RasterImage img(width, height);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); i += kChannels) {
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }
  return img;
}

RasterImage RasterImage::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > width_ || y + h > height_) {
    throw Error(ErrorCode::kInvalidArgument, "crop rectangle outside image");
  }
  RasterImage out(w, h);
  const std::size_t row_bytes = static_cast<std::size_t>(w) * kChannels;
  for (int row = 0; row < h; ++row) {
    std::copy_n(pixels_.begin() + static_cast<std::ptrdiff_t>(offset(x, y + row)), row_bytes,
                out.pixels_.begin() + static_cast<std::ptrdiff_t>(out.offset(0, row)));
  }
  return out;
}

void RasterImage::paste(const RasterImage& src, int x, int y) {
  if (x < 0 || y < 0 || x + src.width_ > width_ || y + src.height_ > height_) {
    throw Error(ErrorCode::kInvalidArgument, "paste rectangle outside image");
  }
  const std::size_t row_bytes = static_cast<std::size_t>(src.width_) * kChannels;
  for (int row = 0; row < src.height_; ++row) {
    std::copy_n(src.pixels_.begin() + static_cast<std::ptrdiff_t>(src.offset(0, row)), row_bytes,
                pixels_.begin() + static_cast<std::ptrdiff_t>(offset(x, y + row)));
  }
}

RasterImage crop_to_even(const RasterImage& img) {
  const int w = img.width() - img.width() % 2;
  const int h = img.height() - img.height() % 2;
  if (w == img.width() && h == img.height()) return img;
  return img.crop(0, 0, w, h);
}

RasterImage resize_bilinear(const RasterImage& img, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be at least 1x1");
  }
  if (width == img.width() && height == img.height()) return img;

  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  const int max_x = img.width() - 1;
  const int max_y = img.height() - 1;

  RasterImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(max_y));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, max_y);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(max_x));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, max_x);
      const double wx = fx - x0;
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        // a + (b - a) * w keeps constant regions exactly constant.
        const double p00 = img.at(x0, y0, c);
        const double p10 = img.at(x1, y0, c);
        const double p01 = img.at(x0, y1, c);
        const double p11 = img.at(x1, y1, c);
        const double top = p00 + (p10 - p00) * wx;
        const double bottom = p01 + (p11 - p01) * wx;
        const double v = top + (bottom - top) * wy;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

std::vector<double> gray_downsample(const RasterImage& img, int width, int height) {
  std::vector<double> out(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int gy = 0; gy < height; ++gy) {
    const auto [y_lo, y_hi] = cell_bounds(gy, height, img.height());
    for (int gx = 0; gx < width; ++gx) {
      const auto [x_lo, x_hi] = cell_bounds(gx, width, img.width());
      // Integer accumulation: the result is independent of pixel order inside the cell.
      std::uint64_t luma_sum = 0;
      for (int y = y_lo; y < y_hi; ++y) {
        for (int x = x_lo; x < x_hi; ++x) {
          luma_sum += 299u * img.at(x, y, 0) + 587u * img.at(x, y, 1) + 114u * img.at(x, y, 2);
        }
      }
      const auto count = static_cast<std::uint64_t>(y_hi - y_lo) * static_cast<std::uint64_t>(x_hi - x_lo);
      out[static_cast<std::size_t>(gy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(gx)] =
          static_cast<double>(luma_sum) / (1000.0 * static_cast<double>(count));
    }
  }
  return out;
}

}  // namespace gridprobe::imaging
