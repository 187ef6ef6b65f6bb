#pragma once

#include <cstdint>
#include <vector>

namespace subcam {

// Dense H x W x C double image, values nominally in [0,1], row-major [y][x][c].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  static Image zeros(int h, int w, int c);

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_dims(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// H x W label grid; 0 is background, values 1..C are category indices + 1.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  static Mask zeros(int h, int w);

  std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

Image hflip(const Image& img);
Mask hflip(const Mask& mask);

Image crop(const Image& img, int y0, int x0, int h, int w);
Mask crop(const Mask& mask, int y0, int x0, int h, int w);

// Same-size calls return an exact copy.
Image bilinear_resize(const Image& img, int out_h, int out_w);
Mask nearest_resize(const Mask& mask, int out_h, int out_w);

// Bilinear upsample of a single-channel grid (used for activation maps).
std::vector<double> bilinear_resize_plane(const std::vector<double>& plane, int h, int w,
                                          int out_h, int out_w);

}  // namespace subcam
