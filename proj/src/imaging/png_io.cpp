#include "gridprobe/imaging/png_io.hpp"

#include <png.h>

#include <array>
#include <cstring>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"

namespace gridprobe::imaging {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct PngImage {
  png_image image{};
  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

bool looks_like_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= kSignature.size() && std::equal(kSignature.begin(), kSignature.end(), bytes.begin());
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  if (!looks_like_png(bytes)) throw Error(ErrorCode::kDecode, "payload is not a PNG");
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kDecode, std::string("png header: ") + png.image.message);
  }
  png.image.format = PNG_FORMAT_RGBA;
  const int width = static_cast<int>(png.image.width);
  const int height = static_cast<int>(png.image.height);
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, rgba.data(), 0, nullptr)) {
    throw Error(ErrorCode::kDecode, std::string("png body: ") + png.image.message);
  }

  RasterImage out(width, height);
  auto dst = out.pixels();
  for (std::size_t src = 0, d = 0; d < dst.size(); src += 4, d += 3) {
    const unsigned alpha = rgba[src + 3];
    for (std::size_t c = 0; c < 3; ++c) {
      dst[d + c] = static_cast<std::uint8_t>((rgba[src + c] * alpha + 255u * (255u - alpha) + 127u) / 255u);
    }
  }
  return out;
}

RasterImage load_png(const std::string& path) {
  try {
    return decode_png(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width());
  png.image.height = static_cast<png_uint_32>(img.height());
  png.image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, img.pixels().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode: ") + png.image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, img.pixels().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

void save_png(const RasterImage& img, const std::string& path) { write_file_bytes(path, encode_png(img)); }

}  // namespace gridprobe::imaging
