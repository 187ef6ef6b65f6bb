#include "subcam/png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace subcam {

namespace {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  std::uint32_t crc = crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32(out, crc);
}

void write_png(const std::string& path, const std::uint8_t* pixels, int h, int w, int channels) {
  if (h <= 0 || w <= 0 || (channels != 1 && channels != 3)) {
    throw std::invalid_argument("png: unsupported geometry");
  }
  const std::size_t stride = static_cast<std::size_t>(w) * channels;
  std::vector<std::uint8_t> raw((stride + 1) * h);
  for (int y = 0; y < h; ++y) {
    raw[(stride + 1) * y] = 0;  // filter: none
    std::memcpy(&raw[(stride + 1) * y + 1], pixels + stride * y, stride);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  // Fixed level so re-encoding the same pixels yields identical bytes.
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("png: deflate failed");
  }
  compressed.resize(bound);

  std::vector<std::uint8_t> file(kSignature, kSignature + 8);
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(w));
  put_u32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);                                  // bit depth
  ihdr.push_back(channels == 1 ? 0 : 2);              // color type
  ihdr.push_back(0);                                  // compression
  ihdr.push_back(0);                                  // filter method
  ihdr.push_back(0);                                  // no interlace
  append_chunk(file, "IHDR", ihdr);
  append_chunk(file, "IDAT", compressed);
  append_chunk(file, "IEND", {});

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("png: cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(file.data()), static_cast<std::streamsize>(file.size()));
  if (!out) throw std::runtime_error("png: write failed: " + path);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png_rgb8(const std::string& path, const Image& img) {
  if (img.channels != 3) throw std::invalid_argument("png: write_png_rgb8 needs 3 channels");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(img.height) * img.width * 3);
  for (std::size_t i = 0; i < px.size(); ++i) {
    double v = img.data[i];
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    px[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_png(path, px.data(), img.height, img.width, 3);
}

void write_png_gray8(const std::string& path, const std::vector<std::uint8_t>& pixels, int h, int w) {
  if (static_cast<std::size_t>(h) * w != pixels.size()) {
    throw std::invalid_argument("png: pixel count does not match dims");
  }
  write_png(path, pixels.data(), h, w, 1);
}

PngPixels read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("png: cannot open: " + path);
  std::vector<std::uint8_t> file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (file.size() < 8 || std::memcmp(file.data(), kSignature, 8) != 0) {
    throw std::runtime_error("png: not a PNG file: " + path);
  }

  int w = 0, h = 0, bit_depth = 0, color_type = 0, interlace = 0;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool saw_ihdr = false, saw_iend = false;
  while (pos + 8 <= file.size() && !saw_iend) {
    std::uint32_t len = get_u32(&file[pos]);
    if (pos + 12 + len > file.size()) throw std::runtime_error("png: truncated chunk: " + path);
    const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
    const std::uint8_t* payload = &file[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw std::runtime_error("png: bad IHDR: " + path);
      w = static_cast<int>(get_u32(payload));
      h = static_cast<int>(get_u32(payload + 4));
      bit_depth = payload[8];
      color_type = payload[9];
      interlace = payload[12];
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    } else if (std::memcmp(type, "PLTE", 4) == 0) {
      throw std::runtime_error("png: palette images are not supported: " + path);
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || idat.empty()) throw std::runtime_error("png: missing IHDR or IDAT: " + path);
  if (bit_depth != 8) throw std::runtime_error("png: only 8-bit depth supported: " + path);
  if (interlace != 0) throw std::runtime_error("png: interlaced files are not supported: " + path);
  int src_channels;
  switch (color_type) {
    case 0: src_channels = 1; break;
    case 2: src_channels = 3; break;
    case 4: src_channels = 2; break;
    case 6: src_channels = 4; break;
    default: throw std::runtime_error("png: unsupported color type: " + path);
  }
  if (w <= 0 || h <= 0) throw std::runtime_error("png: bad dimensions: " + path);

  const std::size_t stride = static_cast<std::size_t>(w) * src_channels;
  std::vector<std::uint8_t> raw((stride + 1) * h);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  int rc = uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
  if (rc != Z_OK || raw_len != raw.size()) {
    throw std::runtime_error("png: inflate failed: " + path);
  }

  // De-filter scanlines in place (bpp = bytes per pixel).
  const int bpp = src_channels;
  std::vector<std::uint8_t> pixels(stride * h);
  for (int y = 0; y < h; ++y) {
    std::uint8_t filter = raw[(stride + 1) * y];
    const std::uint8_t* src = &raw[(stride + 1) * y + 1];
    std::uint8_t* dst = &pixels[stride * y];
    const std::uint8_t* prev = y > 0 ? &pixels[stride * (y - 1)] : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      int a = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
      int b = prev ? prev[i] : 0;
      int c = (prev && i >= static_cast<std::size_t>(bpp)) ? prev[i - bpp] : 0;
      int v;
      switch (filter) {
        case 0: v = src[i]; break;
        case 1: v = src[i] + a; break;
        case 2: v = src[i] + b; break;
        case 3: v = src[i] + (a + b) / 2; break;
        case 4: v = src[i] + paeth(a, b, c); break;
        default: throw std::runtime_error("png: bad filter byte: " + path);
      }
      dst[i] = static_cast<std::uint8_t>(v & 0xff);
    }
  }

  PngPixels out;
  out.height = h;
  out.width = w;
  out.channels = src_channels == 1 || src_channels == 2 ? 1 : 3;
  out.data.resize(static_cast<std::size_t>(h) * w * out.channels);
  for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
    for (int c = 0; c < out.channels; ++c) out.data[p * out.channels + c] = pixels[p * src_channels + c];
  }
  return out;
}

Image read_png_image(const std::string& path) {
  PngPixels px = read_png(path);
  Image img = Image::zeros(px.height, px.width, px.channels);
  for (std::size_t i = 0; i < px.data.size(); ++i) img.data[i] = px.data[i] / 255.0;
  return img;
}

Mask read_png_mask(const std::string& path) {
  PngPixels px = read_png(path);
  if (px.channels != 1) throw std::runtime_error("png: mask must be single-channel: " + path);
  Mask m = Mask::zeros(px.height, px.width);
  m.data = std::move(px.data);
  return m;
}

}  // namespace subcam
