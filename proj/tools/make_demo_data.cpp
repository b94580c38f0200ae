// Regenerates the synthetic PNG fixtures under data/demo/. Every picture is a
// procedural drawing (gradients, stripes, simple shapes); nothing here depends
// on outside imagery.
//
//   make_demo_data <data/demo>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "gridprobe/imaging/dhash.hpp"
#include "gridprobe/imaging/png_io.hpp"
#include "gridprobe/imaging/raster.hpp"

namespace fs = std::filesystem;
using gridprobe::imaging::RasterImage;

namespace {

struct Rgb {
  int r, g, b;
};

void put(RasterImage& img, int x, int y, Rgb c) {
  img.at(x, y, 0) = static_cast<std::uint8_t>(std::clamp(c.r, 0, 255));
  img.at(x, y, 1) = static_cast<std::uint8_t>(std::clamp(c.g, 0, 255));
  img.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(c.b, 0, 255));
}

Rgb mix(Rgb a, Rgb b, double t) {
  return {static_cast<int>(std::lround(a.r + (b.r - a.r) * t)), static_cast<int>(std::lround(a.g + (b.g - a.g) * t)),
          static_cast<int>(std::lround(a.b + (b.b - a.b) * t))};
}

template <class Fn>
RasterImage draw(int w, int h, Fn&& fn) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) put(img, x, y, fn(x, y));
  }
  return img;
}

bool in_disc(int x, int y, double cx, double cy, double r) {
  const double dx = x + 0.5 - cx;
  const double dy = y + 0.5 - cy;
  return dx * dx + dy * dy <= r * r;
}

constexpr std::array<Rgb, 10> kPalette = {{{230, 57, 70},
                                           {244, 162, 97},
                                           {233, 196, 106},
                                           {42, 157, 143},
                                           {38, 70, 83},
                                           {131, 56, 236},
                                           {58, 134, 255},
                                           {255, 190, 11},
                                           {6, 214, 160},
                                           {239, 71, 111}}};

RasterImage pool_image(int i) {
  const Rgb a = kPalette[i % 10];
  const Rgb b = kPalette[(i + 1 + i / 5) % 10];  // never equal to a; differs between i and i+10
  const int n = 64;
  switch (i % 5) {
    case 0:
      return draw(n, n, [&](int x, int) { return mix(a, b, x / double(n - 1)); });
    case 1:
      return draw(n, n, [&](int x, int) { return (x / (4 + i % 4)) % 2 ? a : b; });
    case 2:
      return draw(n, n, [&](int x, int y) { return ((x / 8) + (y / 8)) % 2 ? a : mix(a, b, 0.7); });
    case 3:
      return draw(n, n, [&](int x, int y) {
        const double d = std::hypot(x + 0.5 - n / 2.0, y + 0.5 - n / 2.0);
        return static_cast<int>(d / (5 + i % 3)) % 2 ? a : b;
      });
    default:
      return draw(n, n, [&](int x, int y) { return ((x + y) / (6 + i % 5)) % 2 ? mix(a, b, 0.3) : b; });
  }
}

// Simple daylight scenes for the guidance images.
RasterImage scene(int kind) {
  const int n = 96;
  switch (kind) {
    case 0:  // sun over the sea
      return draw(n, n, [&](int x, int y) {
        if (in_disc(x, y, 66, 28, 12)) return Rgb{255, 214, 10};
        if (y < 56) return mix(Rgb{135, 206, 250}, Rgb{200, 230, 255}, y / 56.0);
        return mix(Rgb{0, 105, 148}, Rgb{0, 60, 100}, (y - 56) / 40.0);
      });
    case 1:  // green hill under a blue sky
      return draw(n, n, [&](int x, int y) {
        const double hill = 60 - 22 * std::sin(x / double(n) * 3.14159);
        return y > hill ? Rgb{76, 153, 0} : Rgb{120, 190, 255};
      });
    case 2:  // apple on a table
      return draw(n, n, [&](int x, int y) {
        if (in_disc(x, y, 48, 50, 20)) return Rgb{200, 30, 40};
        if (x >= 46 && x <= 49 && y >= 22 && y < 32) return Rgb{90, 60, 20};
        return y > 66 ? Rgb{160, 110, 60} : Rgb{245, 240, 225};
      });
    case 3:  // house with a red roof
      return draw(n, n, [&](int x, int y) {
        if (y >= 40 && y < 80 && x >= 24 && x < 72) return (x >= 42 && x < 54 && y >= 58) ? Rgb{100, 60, 30} : Rgb{250, 235, 200};
        if (y >= 16 && y < 40 && std::abs(x - 48) <= (y - 16)) return Rgb{180, 40, 30};
        return y >= 80 ? Rgb{90, 170, 70} : Rgb{170, 215, 250};
      });
    case 4:  // flower
      return draw(n, n, [&](int x, int y) {
        if (in_disc(x, y, 48, 40, 7)) return Rgb{250, 200, 0};
        for (int k = 0; k < 6; ++k) {
          const double a = k * 3.14159 / 3;
          if (in_disc(x, y, 48 + 13 * std::cos(a), 40 + 13 * std::sin(a), 8)) return Rgb{240, 120, 200};
        }
        if (x >= 46 && x <= 49 && y > 50) return Rgb{40, 140, 40};
        return Rgb{230, 245, 230};
      });
    default:  // tree
      return draw(n, n, [&](int x, int y) {
        if (in_disc(x, y, 48, 36, 24)) return Rgb{34, 120, 50};
        if (x >= 42 && x < 54 && y >= 56 && y < 88) return Rgb{110, 70, 40};
        return y >= 88 ? Rgb{120, 180, 80} : Rgb{210, 235, 255};
      });
  }
}

// Target-output stand-ins. Each has a different luminance layout so the
// perceptual hashes are far apart.
RasterImage output_image(int kind) {
  const int n = 64;
  switch (kind) {
    case 0:
      return draw(n, n, [&](int x, int) { return mix(Rgb{0, 0, 0}, Rgb{255, 255, 255}, x / double(n - 1)); });
    case 1:
      return draw(n, n, [&](int x, int) { return mix(Rgb{255, 255, 255}, Rgb{0, 0, 0}, x / double(n - 1)); });
    case 2:
      return draw(n, n, [&](int x, int) { return (x / 7) % 2 ? Rgb{250, 250, 250} : Rgb{20, 20, 20}; });
    case 3:
      return draw(n, n, [&](int x, int y) {
        const double d = std::hypot(x + 0.5 - n / 2.0, y + 0.5 - n / 2.0);
        return mix(Rgb{255, 255, 255}, Rgb{0, 0, 0}, std::min(d / 32.0, 1.0));
      });
    default:
      return draw(n, n, [&](int x, int y) { return ((x / 11) + (y / 9)) % 2 ? Rgb{240, 240, 240} : Rgb{30, 30, 30}; });
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_demo_data <output-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  fs::create_directories(root / "pool");
  fs::create_directories(root / "guidance");
  fs::create_directories(root / "outputs");

  std::string pool_manifest;
  std::vector<RasterImage> pool;
  for (int i = 0; i < 25; ++i) {
    pool.push_back(pool_image(i));
    for (int j = 0; j < i; ++j) {
      if (pool[j] == pool.back()) {
        std::cerr << "pool images " << j << " and " << i << " are identical\n";
        return 1;
      }
    }
    char id[16];
    std::snprintf(id, sizeof id, "pattern-%02d", i);
    gridprobe::imaging::save_png(pool.back(), (root / "pool" / (std::string(id) + ".png")).string());
    pool_manifest += std::string(R"({"id": ")") + id + R"(", "path": "pool/)" + id + R"(.png", "label": "pattern"})" + "\n";
  }
  std::FILE* f = std::fopen((root / "pool.jsonl").string().c_str(), "wb");
  std::fwrite(pool_manifest.data(), 1, pool_manifest.size(), f);
  std::fclose(f);

  const std::array<const char*, 6> scenes = {"sea", "hill", "apple", "house", "flower", "tree"};
  for (int k = 0; k < 6; ++k) {
    gridprobe::imaging::save_png(scene(k), (root / "guidance" / (std::string(scenes[k]) + ".png")).string());
  }

  std::vector<std::uint64_t> hashes;
  for (int k = 0; k < 5; ++k) {
    const auto img = output_image(k);
    hashes.push_back(gridprobe::imaging::perceptual_hash(img));
    gridprobe::imaging::save_png(img, (root / "outputs" / ("out-" + std::to_string(k + 1) + ".png")).string());
  }
  int min_distance = 64;
  for (std::size_t i = 0; i < hashes.size(); ++i) {
    for (std::size_t j = i + 1; j < hashes.size(); ++j) {
      min_distance = std::min(min_distance, gridprobe::imaging::hamming_distance(hashes[i], hashes[j]));
    }
  }
  std::cout << "output fixtures: min pairwise dHash distance " << min_distance << '\n';
  return min_distance >= 10 ? 0 : 1;
}
