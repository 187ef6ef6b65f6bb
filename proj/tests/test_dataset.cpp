#include <doctest.h>

#include <filesystem>
#include <set>

#include "subcam/dataset.hpp"
#include "subcam/png_io.hpp"
#include "subcam/util.hpp"

using namespace subcam;
namespace fs = std::filesystem;

namespace {
DatasetSpec small_spec() {
  DatasetSpec spec;
  spec.num_categories = 3;
  spec.subtypes_per_category = 4;
  spec.train_images = 120;
  spec.eval_images = 24;
  spec.image_size = 64;
  spec.seed = 7;
  spec.co_occur_prob = 0.3;
  return spec;
}
}  // namespace

TEST_CASE("mask and label vector agree on every generated sample") {
  auto samples = generate_split(small_spec(), "train", 60);
  for (const Sample& s : samples) {
    std::set<int> in_mask;
    for (auto v : s.gt_mask.data) {
      if (v != 0) in_mask.insert(v - 1);
    }
    for (int c = 0; c < 3; ++c) {
      CHECK(static_cast<bool>(s.parent_labels[c]) == static_cast<bool>(in_mask.count(c)));
      // latent sub-types exactly for present categories
      CHECK((s.latent_subtypes[c] >= 0) == static_cast<bool>(s.parent_labels[c]));
    }
    CHECK(s.image.height == 64);
    CHECK(s.image.channels == 3);
    for (double v : s.image.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("at least one category per image; zero co-occurrence means exactly one") {
  DatasetSpec spec = small_spec();
  spec.co_occur_prob = 0.0;
  auto samples = generate_split(spec, "train", 40);
  for (const Sample& s : samples) {
    int present = 0;
    for (auto v : s.parent_labels) present += v;
    CHECK(present == 1);
  }
}

TEST_CASE("label marginals track the configured rates within 10 percent") {
  DatasetSpec spec = small_spec();
  spec.train_images = 900;
  auto samples = generate_split(spec, "train", spec.train_images);
  auto expected = expected_label_marginals(spec);
  std::vector<int> counts(3, 0);
  for (const Sample& s : samples) {
    for (int c = 0; c < 3; ++c) counts[c] += s.parent_labels[c];
  }
  for (int c = 0; c < 3; ++c) {
    double observed = static_cast<double>(counts[c]) / spec.train_images;
    CHECK(observed == doctest::Approx(expected[c]).epsilon(0.10));
  }
}

TEST_CASE("sub-type balance within each category is 1/G within 10 percent") {
  DatasetSpec spec = small_spec();
  spec.train_images = 1200;
  auto samples = generate_split(spec, "train", spec.train_images);
  for (int c = 0; c < 3; ++c) {
    std::vector<int> counts(4, 0);
    int total = 0;
    for (const Sample& s : samples) {
      if (s.parent_labels[c]) {
        counts[s.latent_subtypes[c]]++;
        total++;
      }
    }
    for (int g = 0; g < 4; ++g) {
      double frac = static_cast<double>(counts[g]) / total;
      CHECK(frac > 0.25 * 0.9);
      CHECK(frac < 0.25 * 1.1);
    }
  }
}

TEST_CASE("generation is bit-identical for identical specs") {
  auto a = generate_split(small_spec(), "train", 10);
  auto b = generate_split(small_spec(), "train", 10);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].image.data == b[i].image.data);
    CHECK(a[i].gt_mask.data == b[i].gt_mask.data);
    CHECK(a[i].parent_labels == b[i].parent_labels);
  }
}

TEST_CASE("infeasible specs are rejected") {
  DatasetSpec spec = small_spec();
  spec.image_size = 16;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.num_categories = 1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.co_occur_prob = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("spec json round-trip and unknown-field rejection") {
  DatasetSpec spec = small_spec();
  DatasetSpec back = DatasetSpec::from_json(spec.to_json());
  CHECK(back.to_json() == spec.to_json());
  auto j = spec.to_json();
  j["not_a_field"] = 1;
  CHECK_THROWS_AS(DatasetSpec::from_json(j), ConfigError);
}

TEST_CASE("save and reload a dataset from disk") {
  DatasetSpec spec = small_spec();
  spec.train_images = 12;
  spec.eval_images = 6;
  fs::path root = fs::temp_directory_path() / "subcam-test" / "ds-roundtrip";
  fs::remove_all(root);
  auto train = generate_split(spec, "train", spec.train_images);
  auto eval = generate_split(spec, "eval", spec.eval_images);
  save_split(root.string(), "train", train, spec.num_categories);
  save_split(root.string(), "eval", eval, spec.num_categories);
  write_manifest(root.string(), spec);

  Dataset ds = load_dataset(root.string());
  REQUIRE(ds.train.size() == 12);
  REQUIRE(ds.eval.size() == 6);
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    CHECK(ds.train[i].id == train[i].id);
    CHECK(ds.train[i].parent_labels == train[i].parent_labels);
    CHECK(ds.train[i].gt_mask.data == train[i].gt_mask.data);
    CHECK(ds.train[i].latent_subtypes == train[i].latent_subtypes);
    CHECK(ds.train[i].has_mask);
    // images only pass through 8-bit quantization
    for (std::size_t p = 0; p < ds.train[i].image.data.size(); ++p) {
      CHECK(std::abs(ds.train[i].image.data[p] - train[i].image.data[p]) <= 0.5 / 255 + 1e-12);
    }
  }
}

TEST_CASE("load_folder reports per-file errors") {
  fs::path root = fs::temp_directory_path() / "subcam-test" / "ds-errors";
  fs::remove_all(root);
  fs::create_directories(root / "images");
  DatasetSpec spec = small_spec();
  Sample s = generate_sample(spec, "train", 0);
  write_png_rgb8((root / "images" / "ok.png").string(), s.image);
  write_text_file((root / "images" / "bad.png").string(), "not a png");

  SUBCASE("wrong label arity names the row") {
    write_text_file((root / "labels.csv").string(), "id,c0,c1,c2\nok,1,0\n");
    LoadResult r = load_folder(root.string(), (root / "labels.csv").string());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("ok") != std::string::npos);
    CHECK(r.samples.empty());
  }
  SUBCASE("missing image file names the id") {
    write_text_file((root / "labels.csv").string(), "id,c0,c1,c2\nok,1,0,0\nghost,0,1,0\n");
    LoadResult r = load_folder(root.string(), (root / "labels.csv").string());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("ghost") != std::string::npos);
    CHECK(r.samples.size() == 1);
    CHECK_FALSE(r.samples[0].has_mask);  // no masks dir: evaluation-ineligible
  }
  SUBCASE("unreadable image names the id") {
    write_text_file((root / "labels.csv").string(), "id,c0,c1,c2\nbad,1,0,0\n");
    LoadResult r = load_folder(root.string(), (root / "labels.csv").string());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("bad") != std::string::npos);
  }
  SUBCASE("non-binary label value is rejected") {
    write_text_file((root / "labels.csv").string(), "id,c0,c1,c2\nok,1,2,0\n");
    LoadResult r = load_folder(root.string(), (root / "labels.csv").string());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("2") != std::string::npos);
  }
}

TEST_CASE("augment: flip with probability one applied twice restores the image") {
  DatasetSpec spec = small_spec();
  Sample s = generate_sample(spec, "train", 3);
  AugmentPolicy p;
  p.flip_prob = 1.0;
  p.crop_lo = p.crop_hi = 1.0;
  p.jitter = 0.0;
  p.seed = 5;
  Sample once = augment(s, p, 0);
  CHECK(once.image.data != s.image.data);
  Sample twice = augment(once, p, 0);
  CHECK(twice.image.data == s.image.data);
  CHECK(twice.gt_mask.data == s.gt_mask.data);
}

TEST_CASE("augment: identity policy returns the sample unchanged") {
  Sample s = generate_sample(small_spec(), "train", 4);
  AugmentPolicy p;
  p.flip_prob = 0.0;
  p.crop_lo = p.crop_hi = 1.0;
  p.jitter = 0.0;
  p.scale_lo = p.scale_hi = 1.0;
  Sample out = augment(s, p, 2);
  CHECK(out.image.data == s.image.data);
  CHECK(out.gt_mask.data == s.gt_mask.data);
}

TEST_CASE("augment: deterministic, label-preserving, dimension-preserving") {
  Sample s = generate_sample(small_spec(), "train", 5);
  AugmentPolicy p;
  p.seed = 11;
  p.jitter = 0.2;
  p.crop_lo = 0.7;
  p.scale_lo = 0.9;
  p.scale_hi = 1.1;
  Sample a = augment(s, p, 3);
  Sample b = augment(s, p, 3);
  CHECK(a.image.data == b.image.data);
  CHECK(a.parent_labels == s.parent_labels);
  CHECK(a.image.height == s.image.height);
  CHECK(a.image.width == s.image.width);
  Sample c = augment(s, p, 4);
  CHECK(a.image.data != c.image.data);  // epoch enters the stream
}
