#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gridprobe::imaging {

/// Row-major 8-bit RGB image. The buffer always holds width*height*3 bytes.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  /// Zero-filled image. Throws Error(kInvalidArgument) on non-positive sizes.
  RasterImage(int width, int height);
  /// Adopts an existing buffer; throws if its length does not match.
  RasterImage(int width, int height, std::vector<std::uint8_t> pixels);

  static RasterImage filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t at(int x, int y, int channel) const {
    return pixels_[offset(x, y) + static_cast<std::size_t>(channel)];
  }
  std::uint8_t& at(int x, int y, int channel) {
    return pixels_[offset(x, y) + static_cast<std::size_t>(channel)];
  }

  /// Copy of the rectangle [x, x+w) x [y, y+h). Throws when out of bounds.
  RasterImage crop(int x, int y, int w, int h) const;
  /// Writes src with its top-left corner at (x, y). Throws when out of bounds.
  void paste(const RasterImage& src, int x, int y);

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Trims one trailing column and/or row so both dimensions are even.
RasterImage crop_to_even(const RasterImage& img);

/// Bilinear stretch-to-fit resize (half-pixel-centre sampling, edge clamp).
/// A same-size request returns an exact copy.
RasterImage resize_bilinear(const RasterImage& img, int width, int height);

/// Box-filter downsample onto a width x height grid of integer-bounded cells,
/// returning 0..255 luma averages (BT.601 weights). Cells never share pixels.
std::vector<double> gray_downsample(const RasterImage& img, int width, int height);

}  // namespace gridprobe::imaging
