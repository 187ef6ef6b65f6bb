#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcam/image.hpp"

namespace subcam {

// Synthetic multi-label benchmark. Each category is an object with a small
// category-colored core on a shared-look body; what varies *within* a
// category is its planted sub-type factor, rotating per category between
// shape family, object scale band and background context. The last category
// (by default) co-occurs with the others at a configurable rate.
struct DatasetSpec {
  int num_categories = 3;
  int subtypes_per_category = 4;
  int train_images = 2000;
  int eval_images = 400;
  int image_size = 64;
  std::uint64_t seed = 7;
  double co_occur_prob = 0.3;
  int co_occur_category = -1;  // -1 selects the last category
  double background_noise = 0.02;
  double body_color_jitter = 0.06;
  double context_strength = 0.05;
  int distractor_count = 3;

  void validate() const;
  nlohmann::json to_json() const;
  static DatasetSpec from_json(const nlohmann::json& j);
};

struct Sample {
  std::string id;
  Image image;                              // H x W x 3, values in [0,1]
  std::vector<std::uint8_t> parent_labels;  // multi-hot, length C
  Mask gt_mask;                             // values in {0..C}, 0 = background
  bool has_mask = false;
  std::vector<int> latent_subtypes;  // length C, -1 where the category is absent;
                                     // evaluation metadata, never used in training
};

Sample generate_sample(const DatasetSpec& spec, const std::string& split, int index);
std::vector<Sample> generate_split(const DatasetSpec& spec, const std::string& split, int count);
std::vector<Sample> generate_dataset(const DatasetSpec& spec);  // the train split

// Expected label marginals implied by the stratified generation scheme.
std::vector<double> expected_label_marginals(const DatasetSpec& spec);

// On-disk layout, one directory per split:
//   <root>/manifest.json
//   <root>/<split>/images/<id>.png     8-bit RGB
//   <root>/<split>/masks/<id>.png      8-bit gray, pixel = category index (0 = bg)
//   <root>/<split>/labels.csv          id,c0,c1,...
//   <root>/<split>/subtypes.csv        id,category,subtype (evaluation metadata)
void save_split(const std::string& root, const std::string& split, const std::vector<Sample>& samples,
                int num_categories);
void write_manifest(const std::string& root, const DatasetSpec& spec);

struct LoadResult {
  std::vector<Sample> samples;
  std::vector<std::string> errors;  // one entry per rejected file/row
  bool ok() const { return errors.empty(); }
};

// Reads images listed in a label CSV (header "id,c0,c1,..."). Images are
// looked up under <dir>/images/<id>.png, falling back to <dir>/<id>.png.
// Masks and subtypes are attached when present; samples without masks are
// evaluation-ineligible (has_mask = false).
LoadResult load_folder(const std::string& dir, const std::string& label_file);

struct Dataset {
  DatasetSpec spec;
  std::vector<Sample> train;
  std::vector<Sample> eval;
};

Dataset load_dataset(const std::string& root);  // via manifest.json
std::vector<Sample> load_split_strict(const std::string& split_dir);

struct AugmentPolicy {
  double flip_prob = 0.5;
  double crop_lo = 0.8;  // crop window as a fraction of each side
  double crop_hi = 1.0;
  double jitter = 0.1;  // color jitter amplitude
  double scale_lo = 1.0;
  double scale_hi = 1.0;
  std::uint64_t seed = 0;  // stream root; combined with (epoch, sample id)

  void validate() const;
  nlohmann::json to_json() const;
  static AugmentPolicy from_json(const nlohmann::json& j);
};

// Label vector is never touched; image and mask receive the same geometric
// transform; output dimensions equal the input dimensions. Deterministic in
// (policy.seed, epoch, sample.id).
Sample augment(const Sample& sample, const AugmentPolicy& policy, int epoch);

}  // namespace subcam
