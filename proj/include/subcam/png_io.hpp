#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subcam/image.hpp"

namespace subcam {

// Minimal PNG support on top of zlib: 8-bit gray / RGB writing (fixed
// compression level, so identical pixels give identical files), and reading
// of 8-bit gray, gray+alpha, RGB and RGBA files (alpha dropped). Palette and
// interlaced files are rejected with a clear error.

// Values are clamped to [0,1] and quantized as round(255 * v).
void write_png_rgb8(const std::string& path, const Image& img);

void write_png_gray8(const std::string& path, const std::vector<std::uint8_t>& pixels, int h, int w);

struct PngPixels {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 or 3 after alpha drop
  std::vector<std::uint8_t> data;
};

PngPixels read_png(const std::string& path);

Image read_png_image(const std::string& path);  // values scaled to [0,1]
Mask read_png_mask(const std::string& path);    // requires single channel

}  // namespace subcam
