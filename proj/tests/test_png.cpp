#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "subcam/png_io.hpp"
#include "subcam/rng.hpp"
#include "subcam/util.hpp"

using namespace subcam;
namespace fs = std::filesystem;

namespace {
fs::path tmp_file(const char* name) {
  fs::path dir = fs::temp_directory_path() / "subcam-test";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("rgb png round-trips through 8-bit quantization") {
  Rng rng(31);
  Image img = Image::zeros(13, 9, 3);
  for (double& v : img.data) v = rng.uniform(0.0, 1.0);
  auto path = tmp_file("roundtrip_rgb.png");
  write_png_rgb8(path.string(), img);
  Image back = read_png_image(path.string());
  REQUIRE(back.height == 13);
  REQUIRE(back.width == 9);
  REQUIRE(back.channels == 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5 / 255.0 + 1e-12);
  }
}

TEST_CASE("gray png preserves mask bytes exactly") {
  Mask m = Mask::zeros(6, 7);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<std::uint8_t>(i % 4);
  auto path = tmp_file("roundtrip_mask.png");
  write_png_gray8(path.string(), m.data, m.height, m.width);
  Mask back = read_png_mask(path.string());
  CHECK(back.data == m.data);
}

TEST_CASE("identical pixels produce identical files") {
  Image img = Image::zeros(8, 8, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = (i % 7) / 7.0;
  auto p1 = tmp_file("det1.png"), p2 = tmp_file("det2.png");
  write_png_rgb8(p1.string(), img);
  write_png_rgb8(p2.string(), img);
  CHECK(read_text_file(p1.string()) == read_text_file(p2.string()));
}

TEST_CASE("reader rejects garbage and missing files") {
  auto path = tmp_file("not_a_png.png");
  write_text_file(path.string(), "definitely not a png");
  CHECK_THROWS_AS(read_png(path.string()), std::runtime_error);
  CHECK_THROWS_AS(read_png((tmp_file("missing_dir") / "nope.png").string()), std::runtime_error);
}

TEST_CASE("mask reader rejects rgb input") {
  Image img = Image::zeros(4, 4, 3);
  auto path = tmp_file("rgb_for_mask.png");
  write_png_rgb8(path.string(), img);
  CHECK_THROWS_AS(read_png_mask(path.string()), std::runtime_error);
}
