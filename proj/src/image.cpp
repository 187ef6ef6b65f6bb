#include "subcam/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subcam {

Image Image::zeros(int h, int w, int c) {
  if (h <= 0 || w <= 0 || c <= 0) throw std::invalid_argument("image: dimensions must be positive");
  Image img;
  img.height = h;
  img.width = w;
  img.channels = c;
  img.data.assign(static_cast<std::size_t>(h) * w * c, 0.0);
  return img;
}

Mask Mask::zeros(int h, int w) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("mask: dimensions must be positive");
  Mask m;
  m.height = h;
  m.width = w;
  m.data.assign(static_cast<std::size_t>(h) * w, 0);
  return m;
}

Image hflip(const Image& img) {
  Image out = Image::zeros(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

Mask hflip(const Mask& mask) {
  Mask out = Mask::zeros(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) out.at(y, x) = mask.at(y, mask.width - 1 - x);
  return out;
}

Image crop(const Image& img, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h <= 0 || w <= 0 || y0 + h > img.height || x0 + w > img.width) {
    throw std::invalid_argument("crop: window out of bounds");
  }
  Image out = Image::zeros(h, w, img.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

Mask crop(const Mask& mask, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h <= 0 || w <= 0 || y0 + h > mask.height || x0 + w > mask.width) {
    throw std::invalid_argument("crop: window out of bounds");
  }
  Mask out = Mask::zeros(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(y, x) = mask.at(y0 + y, x0 + x);
  return out;
}

Image bilinear_resize(const Image& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize: output dims must be positive");
  if (out_h == img.height && out_w == img.width) return img;
  Image out = Image::zeros(out_h, out_w, img.channels);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - wx) + img.at(y0, x1, c) * wx;
        const double bot = img.at(y1, x0, c) * (1.0 - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Mask nearest_resize(const Mask& mask, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize: output dims must be positive");
  if (out_h == mask.height && out_w == mask.width) return mask;
  Mask out = Mask::zeros(out_h, out_w);
  const double sy = static_cast<double>(mask.height) / out_h;
  const double sx = static_cast<double>(mask.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    int iy = std::min(static_cast<int>((y + 0.5) * sy), mask.height - 1);
    for (int x = 0; x < out_w; ++x) {
      int ix = std::min(static_cast<int>((x + 0.5) * sx), mask.width - 1);
      out.at(y, x) = mask.at(iy, ix);
    }
  }
  return out;
}

std::vector<double> bilinear_resize_plane(const std::vector<double>& plane, int h, int w,
                                          int out_h, int out_w) {
  if (static_cast<std::size_t>(h) * w != plane.size()) {
    throw std::invalid_argument("resize_plane: size does not match dims");
  }
  Image tmp;
  tmp.height = h;
  tmp.width = w;
  tmp.channels = 1;
  tmp.data = plane;
  return bilinear_resize(tmp, out_h, out_w).data;
}

}  // namespace subcam
