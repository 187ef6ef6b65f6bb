#include "subcam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "subcam/png_io.hpp"
#include "subcam/rng.hpp"
#include "subcam/util.hpp"

namespace fs = std::filesystem;

namespace subcam {

namespace {

// Sub-type factor per category, rotating through the three planted kinds.
enum class Factor { kShapeFamily, kScaleBand, kContext };
Factor factor_of(int category) {
  switch (category % 3) {
    case 0: return Factor::kShapeFamily;
    case 1: return Factor::kScaleBand;
    default: return Factor::kContext;
  }
}

enum class BodyShape { kDisk, kSquare, kTriangle, kDiamond, kCross };

struct ObjectPlan {
  int category = 0;
  int subtype = 0;
  BodyShape shape = BodyShape::kDisk;
  double radius = 0.0;
  double cy = 0.0, cx = 0.0;
  double body_r = 0, body_g = 0, body_b = 0;
};

bool inside_shape(BodyShape shape, double dy, double dx, double r) {
  switch (shape) {
    case BodyShape::kDisk:
      return dy * dy + dx * dx <= r * r;
    case BodyShape::kSquare:
      return std::abs(dy) <= 0.82 * r && std::abs(dx) <= 0.82 * r;
    case BodyShape::kTriangle: {
      if (dy < -1.05 * r || dy > 0.85 * r) return false;
      double halfwidth = 1.1 * r * (dy + 1.05 * r) / (1.9 * r);
      return std::abs(dx) <= halfwidth;
    }
    case BodyShape::kDiamond:
      return std::abs(dy) + std::abs(dx) <= 1.15 * r;
    case BodyShape::kCross:
      return (std::abs(dy) <= 0.36 * r && std::abs(dx) <= r) ||
             (std::abs(dx) <= 0.36 * r && std::abs(dy) <= r);
  }
  return false;
}

std::vector<std::pair<int, int>> raster_pixels(const ObjectPlan& obj, int h, int w) {
  std::vector<std::pair<int, int>> px;
  const double extent = 1.3 * obj.radius;
  int y0 = std::max(0, static_cast<int>(std::floor(obj.cy - extent)));
  int y1 = std::min(h - 1, static_cast<int>(std::ceil(obj.cy + extent)));
  int x0 = std::max(0, static_cast<int>(std::floor(obj.cx - extent)));
  int x1 = std::min(w - 1, static_cast<int>(std::ceil(obj.cx + extent)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (inside_shape(obj.shape, y - obj.cy, x - obj.cx, obj.radius)) px.emplace_back(y, x);
  return px;
}

void hsv_to_rgb(double hue, double sat, double val, double* r, double* g, double* b) {
  double h6 = hue * 6.0;
  int i = static_cast<int>(h6) % 6;
  double f = h6 - std::floor(h6);
  double p = val * (1 - sat), q = val * (1 - sat * f), t = val * (1 - sat * (1 - f));
  switch (i) {
    case 0: *r = val; *g = t; *b = p; break;
    case 1: *r = q; *g = val; *b = p; break;
    case 2: *r = p; *g = val; *b = t; break;
    case 3: *r = p; *g = q; *b = val; break;
    case 4: *r = t; *g = p; *b = val; break;
    default: *r = val; *g = p; *b = q; break;
  }
}

BodyShape shape_for(int category, int subtype) {
  static constexpr BodyShape kFamilies[4] = {BodyShape::kDisk, BodyShape::kSquare,
                                             BodyShape::kTriangle, BodyShape::kDiamond};
  switch (factor_of(category)) {
    case Factor::kShapeFamily: return kFamilies[subtype % 4];
    case Factor::kScaleBand: return BodyShape::kDisk;
    default: return BodyShape::kCross;
  }
}

double radius_for(const DatasetSpec& spec, int category, int subtype, Rng& rng) {
  const double unit = spec.image_size;
  if (factor_of(category) == Factor::kScaleBand) {
    const double lo = 0.08 * unit, hi = 0.25 * unit;
    const double band = (hi - lo) / spec.subtypes_per_category;
    const double blo = lo + band * subtype + 0.15 * band;
    const double bhi = lo + band * (subtype + 1) - 0.15 * band;
    return rng.uniform(blo, bhi);
  }
  double r = rng.uniform(0.14 * unit, 0.20 * unit);
  if (factor_of(category) == Factor::kShapeFamily) {
    // Sub-types beyond the four base shapes reuse them at a reduced size.
    r *= std::max(0.5, 1.0 - 0.12 * (subtype / 4));
  }
  return r;
}

void apply_context_style(Image& img, int style, int variant, double strength, Rng& rng) {
  const int period = 8 + 4 * (variant % 2);
  const double phase = rng.uniform(0.0, 1.0) * period;
  switch (style % 4) {
    case 0:
      break;  // plain
    case 1:  // horizontal stripes
      for (int y = 0; y < img.height; ++y) {
        double d = (static_cast<int>(y + phase) / (period / 2)) % 2 == 0 ? strength : -strength;
        for (int x = 0; x < img.width; ++x)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) += d;
      }
      break;
    case 2:  // dot grid
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          int yy = (y + static_cast<int>(phase)) % period, xx = (x + static_cast<int>(phase)) % period;
          double dy = yy - period / 2.0, dx = xx - period / 2.0;
          double d = dy * dy + dx * dx <= 4.0 ? 1.6 * strength : -0.25 * strength;
          for (int c = 0; c < 3; ++c) img.at(y, x, c) += d;
        }
      break;
    default:  // horizontal brightness gradient
      for (int x = 0; x < img.width; ++x) {
        double d = 1.6 * strength * (2.0 * x / (img.width - 1) - 1.0);
        for (int y = 0; y < img.height; ++y)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) += d;
      }
      break;
  }
}

std::size_t overlap_count(const std::vector<std::pair<int, int>>& a,
                          const std::set<std::pair<int, int>>& b) {
  std::size_t n = 0;
  for (const auto& p : a) n += b.count(p);
  return n;
}

}  // namespace

void DatasetSpec::validate() const {
  if (num_categories < 2) throw ConfigError("dataset spec: num_categories must be >= 2");
  if (num_categories > 250) throw ConfigError("dataset spec: num_categories must be <= 250");
  if (subtypes_per_category < 2) throw ConfigError("dataset spec: subtypes_per_category must be >= 2");
  if (image_size < 32) {
    throw ConfigError("dataset spec infeasible: image_size " + std::to_string(image_size) +
                      " is too small to fit objects (minimum 32)");
  }
  if (train_images < 1 || eval_images < 0) throw ConfigError("dataset spec: split sizes must be positive");
  if (co_occur_prob < 0.0 || co_occur_prob > 1.0) {
    throw ConfigError("dataset spec: co_occur_prob must lie in [0,1]");
  }
  if (co_occur_category < -1 || co_occur_category >= num_categories) {
    throw ConfigError("dataset spec: co_occur_category out of range");
  }
  if (background_noise < 0 || background_noise > 0.5 || body_color_jitter < 0 ||
      body_color_jitter > 0.5 || context_strength < 0 || context_strength > 0.5) {
    throw ConfigError("dataset spec: noise/jitter/context parameters must lie in [0, 0.5]");
  }
  if (distractor_count < 0) throw ConfigError("dataset spec: distractor_count must be >= 0");
}

nlohmann::json DatasetSpec::to_json() const {
  return nlohmann::json{{"num_categories", num_categories},
                        {"subtypes_per_category", subtypes_per_category},
                        {"train_images", train_images},
                        {"eval_images", eval_images},
                        {"image_size", image_size},
                        {"seed", seed},
                        {"co_occur_prob", co_occur_prob},
                        {"co_occur_category", co_occur_category},
                        {"background_noise", background_noise},
                        {"body_color_jitter", body_color_jitter},
                        {"context_strength", context_strength},
                        {"distractor_count", distractor_count}};
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
  DatasetSpec spec;
  static const std::set<std::string> known = {
      "num_categories", "subtypes_per_category", "train_images",   "eval_images",
      "image_size",     "seed",                  "co_occur_prob",  "co_occur_category",
      "background_noise", "body_color_jitter",   "context_strength", "distractor_count"};
  if (!j.is_object()) throw ConfigError("dataset spec: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("dataset spec: unknown field \"" + it.key() + "\"");
  }
  spec.num_categories = j.value("num_categories", spec.num_categories);
  spec.subtypes_per_category = j.value("subtypes_per_category", spec.subtypes_per_category);
  spec.train_images = j.value("train_images", spec.train_images);
  spec.eval_images = j.value("eval_images", spec.eval_images);
  spec.image_size = j.value("image_size", spec.image_size);
  spec.seed = j.value("seed", spec.seed);
  spec.co_occur_prob = j.value("co_occur_prob", spec.co_occur_prob);
  spec.co_occur_category = j.value("co_occur_category", spec.co_occur_category);
  spec.background_noise = j.value("background_noise", spec.background_noise);
  spec.body_color_jitter = j.value("body_color_jitter", spec.body_color_jitter);
  spec.context_strength = j.value("context_strength", spec.context_strength);
  spec.distractor_count = j.value("distractor_count", spec.distractor_count);
  spec.validate();
  return spec;
}

Sample generate_sample(const DatasetSpec& spec, const std::string& split, int index) {
  spec.validate();
  const int C = spec.num_categories;
  const int G = spec.subtypes_per_category;
  const int H = spec.image_size;
  const int co_cat = spec.co_occur_category < 0 ? C - 1 : spec.co_occur_category;

  char idbuf[64];
  std::snprintf(idbuf, sizeof(idbuf), "%s-%06d", split.c_str(), index);
  const std::string id = idbuf;
  Rng rng(substream(spec.seed, "sample", id));

  // Category, sub-type and co-occurrence assignments are stratified over the
  // sample index so split-level balance is exact; everything visual is drawn
  // from the per-sample stream.
  const int primary = index % C;
  const int primary_subtype = (index / C) % G;
  const bool co_trigger =
      std::floor((index + 1) * spec.co_occur_prob) > std::floor(index * spec.co_occur_prob);
  int secondary = -1;
  int secondary_subtype = -1;
  if (co_trigger && C >= 2) {
    if (primary != co_cat) {
      secondary = co_cat;
    } else {
      int pick = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(C - 1)));
      secondary = pick >= co_cat ? pick + 1 : pick;
    }
    secondary_subtype = static_cast<int>(std::floor(index * spec.co_occur_prob)) % G;
  }

  Sample sample;
  sample.id = id;
  sample.parent_labels.assign(static_cast<std::size_t>(C), 0);
  sample.latent_subtypes.assign(static_cast<std::size_t>(C), -1);
  sample.image = Image::zeros(H, H, 3);
  sample.gt_mask = Mask::zeros(H, H);
  sample.has_mask = true;

  // Background: base gray, then the context style. The style encodes the
  // context-category sub-type when such a category is present, otherwise it
  // is a random distractor style.
  const double base = rng.uniform(0.38, 0.48);
  for (double& v : sample.image.data) v = base;
  int context_style = -1, context_variant = 0;
  for (int c : {primary, secondary}) {
    if (c < 0) continue;
    if (factor_of(c) == Factor::kContext && context_style < 0) {
      int st = c == primary ? primary_subtype : secondary_subtype;
      context_style = st % 4;
      context_variant = st / 4;
    }
  }
  if (context_style < 0) context_style = static_cast<int>(rng.uniform_index(4));
  apply_context_style(sample.image, context_style, context_variant, spec.context_strength, rng);

  // Plan the objects.
  std::vector<ObjectPlan> objects;
  for (int slot = 0; slot < (secondary >= 0 ? 2 : 1); ++slot) {
    ObjectPlan obj;
    obj.category = slot == 0 ? primary : secondary;
    obj.subtype = slot == 0 ? primary_subtype : secondary_subtype;
    obj.shape = shape_for(obj.category, obj.subtype);
    obj.radius = radius_for(spec, obj.category, obj.subtype, rng);
    obj.body_r = 0.50 + rng.uniform(-spec.body_color_jitter, spec.body_color_jitter);
    obj.body_g = 0.56 + rng.uniform(-spec.body_color_jitter, spec.body_color_jitter);
    obj.body_b = 0.62 + rng.uniform(-spec.body_color_jitter, spec.body_color_jitter);
    objects.push_back(obj);
  }

  // Place without heavy occlusion: the second object may cover at most a
  // quarter of the first.
  std::vector<std::vector<std::pair<int, int>>> pixels(objects.size());
  std::set<std::pair<int, int>> first_set;
  for (std::size_t k = 0; k < objects.size(); ++k) {
    ObjectPlan& obj = objects[k];
    const double margin = std::ceil(1.3 * obj.radius) + 1.0;
    if (2.0 * margin + 2.0 > H) {
      throw std::runtime_error("dataset spec infeasible: object of radius " +
                               std::to_string(obj.radius) + " cannot fit in image of size " +
                               std::to_string(H));
    }
    bool placed = false;
    for (int attempt = 0; attempt < 60 && !placed; ++attempt) {
      obj.cy = rng.uniform(margin, H - 1 - margin);
      obj.cx = rng.uniform(margin, H - 1 - margin);
      pixels[k] = raster_pixels(obj, H, H);
      if (k == 0) {
        placed = true;
      } else {
        std::size_t ov = overlap_count(pixels[k], first_set);
        std::size_t limit = std::min(pixels[k].size(), first_set.size()) / 4;
        placed = ov <= limit;
      }
    }
    if (!placed) {
      // Deterministic fallback: grid-search the least-overlapping position.
      std::size_t best_ov = static_cast<std::size_t>(-1);
      double best_cy = margin, best_cx = margin;
      for (double cy = margin; cy <= H - 1 - margin; cy += 2.0) {
        for (double cx = margin; cx <= H - 1 - margin; cx += 2.0) {
          obj.cy = cy;
          obj.cx = cx;
          auto px = raster_pixels(obj, H, H);
          std::size_t ov = overlap_count(px, first_set);
          if (ov < best_ov) {
            best_ov = ov;
            best_cy = cy;
            best_cx = cx;
          }
        }
      }
      obj.cy = best_cy;
      obj.cx = best_cx;
      pixels[k] = raster_pixels(obj, H, H);
      std::size_t hard_limit = std::min(pixels[k].size(), first_set.size()) * 2 / 5;
      if (best_ov > hard_limit) {
        throw std::runtime_error(
            "dataset spec infeasible: objects cannot fit without occlusion in image " + id);
      }
    }
    if (k == 0) first_set.insert(pixels[0].begin(), pixels[0].end());
  }

  // Draw bodies and cores; the mask records the category index + 1, with
  // later objects overwriting earlier ones on the (bounded) overlap.
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const ObjectPlan& obj = objects[k];
    double core_r_col, core_g_col, core_b_col;
    hsv_to_rgb(static_cast<double>(obj.category) / C, 0.9, 1.0, &core_r_col, &core_g_col, &core_b_col);
    const double core_radius = std::max(2.0, 0.28 * obj.radius);
    for (auto [y, x] : pixels[k]) {
      const double dy = y - obj.cy, dx = x - obj.cx;
      if (dy * dy + dx * dx <= core_radius * core_radius) {
        sample.image.at(y, x, 0) = core_r_col;
        sample.image.at(y, x, 1) = core_g_col;
        sample.image.at(y, x, 2) = core_b_col;
      } else {
        sample.image.at(y, x, 0) = obj.body_r;
        sample.image.at(y, x, 1) = obj.body_g;
        sample.image.at(y, x, 2) = obj.body_b;
      }
      sample.gt_mask.at(y, x) = static_cast<std::uint8_t>(obj.category + 1);
    }
    sample.parent_labels[static_cast<std::size_t>(obj.category)] = 1;
    sample.latent_subtypes[static_cast<std::size_t>(obj.category)] = obj.subtype;
  }

  // Small background distractor marks, never on object pixels.
  for (int d = 0; d < spec.distractor_count; ++d) {
    const double shade = rng.bernoulli(0.5) ? 0.22 : 0.85;
    const double r = rng.uniform(1.0, 2.0);
    for (int attempt = 0; attempt < 10; ++attempt) {
      const int cy = rng.uniform_int(2, H - 3), cx = rng.uniform_int(2, H - 3);
      if (sample.gt_mask.at(cy, cx) != 0) continue;
      for (int y = std::max(0, cy - 2); y <= std::min(H - 1, cy + 2); ++y)
        for (int x = std::max(0, cx - 2); x <= std::min(H - 1, cx + 2); ++x) {
          const double dy = y - cy, dx = x - cx;
          if (dy * dy + dx * dx <= r * r && sample.gt_mask.at(y, x) == 0) {
            for (int c = 0; c < 3; ++c) sample.image.at(y, x, c) = shade;
          }
        }
      break;
    }
  }

  // Pixel noise over everything, then clamp to [0,1].
  if (spec.background_noise > 0) {
    for (double& v : sample.image.data) v += rng.uniform(-spec.background_noise, spec.background_noise);
  }
  for (double& v : sample.image.data) v = std::clamp(v, 0.0, 1.0);
  return sample;
}

std::vector<Sample> generate_split(const DatasetSpec& spec, const std::string& split, int count) {
  spec.validate();
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(generate_sample(spec, split, i));
  return out;
}

std::vector<Sample> generate_dataset(const DatasetSpec& spec) {
  return generate_split(spec, "train", spec.train_images);
}

std::vector<double> expected_label_marginals(const DatasetSpec& spec) {
  const int C = spec.num_categories;
  const int co_cat = spec.co_occur_category < 0 ? C - 1 : spec.co_occur_category;
  std::vector<double> m(static_cast<std::size_t>(C), 1.0 / C);
  for (int c = 0; c < C; ++c) {
    if (c == co_cat) {
      m[static_cast<std::size_t>(c)] += spec.co_occur_prob * (C - 1) / C;
    } else {
      m[static_cast<std::size_t>(c)] += spec.co_occur_prob / C / (C - 1);
    }
  }
  return m;
}

void save_split(const std::string& root, const std::string& split, const std::vector<Sample>& samples,
                int num_categories) {
  const fs::path base = fs::path(root) / split;
  fs::create_directories(base / "images");
  fs::create_directories(base / "masks");

  std::ostringstream labels, subtypes;
  labels << "id";
  for (int c = 0; c < num_categories; ++c) labels << ",c" << c;
  labels << "\n";
  subtypes << "id,category,subtype\n";

  for (const Sample& s : samples) {
    write_png_rgb8((base / "images" / (s.id + ".png")).string(), s.image);
    if (s.has_mask) {
      write_png_gray8((base / "masks" / (s.id + ".png")).string(), s.gt_mask.data, s.gt_mask.height,
                      s.gt_mask.width);
    }
    labels << s.id;
    for (int c = 0; c < num_categories; ++c) {
      labels << "," << static_cast<int>(s.parent_labels[static_cast<std::size_t>(c)]);
    }
    labels << "\n";
    for (int c = 0; c < num_categories; ++c) {
      if (s.latent_subtypes[static_cast<std::size_t>(c)] >= 0) {
        subtypes << s.id << "," << c << "," << s.latent_subtypes[static_cast<std::size_t>(c)] << "\n";
      }
    }
  }
  write_text_file((base / "labels.csv").string(), labels.str());
  write_text_file((base / "subtypes.csv").string(), subtypes.str());
}

void write_manifest(const std::string& root, const DatasetSpec& spec) {
  nlohmann::json j{{"format", "subcam-dataset"},
                   {"version", 1},
                   {"spec", spec.to_json()},
                   {"splits", {{"train", spec.train_images}, {"eval", spec.eval_images}}}};
  write_text_file((fs::path(root) / "manifest.json").string(), j.dump(2) + "\n");
}

LoadResult load_folder(const std::string& dir, const std::string& label_file) {
  LoadResult result;
  std::string text;
  try {
    text = read_text_file(label_file);
  } catch (const std::exception& e) {
    result.errors.push_back(e.what());
    return result;
  }

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  int num_categories = -1;
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> rows;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (lineno == 1 && !fields.empty() && fields[0] == "id") {
      num_categories = static_cast<int>(fields.size()) - 1;
      continue;
    }
    if (num_categories < 0) num_categories = static_cast<int>(fields.size()) - 1;
    if (static_cast<int>(fields.size()) != num_categories + 1) {
      result.errors.push_back(label_file + " row " + std::to_string(lineno) + " (\"" + fields[0] +
                              "\"): expected " + std::to_string(num_categories) +
                              " label fields, got " + std::to_string(fields.size() - 1));
      continue;
    }
    std::vector<std::uint8_t> labels;
    bool ok = true;
    for (int c = 0; c < num_categories; ++c) {
      const std::string& f = fields[static_cast<std::size_t>(c) + 1];
      if (f == "0") {
        labels.push_back(0);
      } else if (f == "1") {
        labels.push_back(1);
      } else {
        result.errors.push_back(label_file + " row " + std::to_string(lineno) + " (\"" + fields[0] +
                                "\"): label value \"" + f + "\" is not 0 or 1");
        ok = false;
        break;
      }
    }
    if (ok) rows.emplace_back(fields[0], std::move(labels));
  }
  if (num_categories < 1 && result.errors.empty()) {
    result.errors.push_back(label_file + ": no label rows found");
    return result;
  }

  // Optional sub-type metadata.
  std::map<std::string, std::vector<std::pair<int, int>>> subtype_map;
  const fs::path sub_path = fs::path(dir) / "subtypes.csv";
  if (fs::exists(sub_path)) {
    std::istringstream sub_lines(read_text_file(sub_path.string()));
    std::string sline;
    bool first = true;
    while (std::getline(sub_lines, sline)) {
      if (sline.empty()) continue;
      auto f = split_csv_line(sline);
      if (first && f[0] == "id") {
        first = false;
        continue;
      }
      first = false;
      if (f.size() == 3) subtype_map[f[0]].emplace_back(std::stoi(f[1]), std::stoi(f[2]));
    }
  }

  for (auto& [id, labels] : rows) {
    fs::path img_path = fs::path(dir) / "images" / (id + ".png");
    if (!fs::exists(img_path)) img_path = fs::path(dir) / (id + ".png");
    if (!fs::exists(img_path)) {
      result.errors.push_back("image listed in labels but file missing: " + id);
      continue;
    }
    Sample s;
    s.id = id;
    try {
      s.image = read_png_image(img_path.string());
    } catch (const std::exception& e) {
      result.errors.push_back(std::string("unreadable image for id ") + id + ": " + e.what());
      continue;
    }
    if (s.image.channels == 1) {
      // promote grayscale to 3 channels
      Image rgb = Image::zeros(s.image.height, s.image.width, 3);
      for (int y = 0; y < s.image.height; ++y)
        for (int x = 0; x < s.image.width; ++x)
          for (int c = 0; c < 3; ++c) rgb.at(y, x, c) = s.image.at(y, x, 0);
      s.image = std::move(rgb);
    }
    s.parent_labels = labels;
    s.latent_subtypes.assign(labels.size(), -1);
    const fs::path mask_path = fs::path(dir) / "masks" / (id + ".png");
    if (fs::exists(mask_path)) {
      try {
        s.gt_mask = read_png_mask(mask_path.string());
        if (s.gt_mask.height != s.image.height || s.gt_mask.width != s.image.width) {
          result.errors.push_back("mask size mismatch for id " + id);
          continue;
        }
        s.has_mask = true;
      } catch (const std::exception& e) {
        result.errors.push_back(std::string("unreadable mask for id ") + id + ": " + e.what());
        continue;
      }
    } else {
      s.has_mask = false;  // evaluation-ineligible
      s.gt_mask = Mask();
    }
    if (auto it = subtype_map.find(id); it != subtype_map.end()) {
      for (auto [cat, st] : it->second) {
        if (cat >= 0 && cat < static_cast<int>(s.latent_subtypes.size())) {
          s.latent_subtypes[static_cast<std::size_t>(cat)] = st;
        }
      }
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

std::vector<Sample> load_split_strict(const std::string& split_dir) {
  LoadResult r = load_folder(split_dir, (fs::path(split_dir) / "labels.csv").string());
  if (!r.ok()) {
    std::string msg = "errors loading " + split_dir + ":";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return std::move(r.samples);
}

Dataset load_dataset(const std::string& root) {
  const fs::path manifest_path = fs::path(root) / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw ConfigError("dataset: manifest.json not found under " + root);
  }
  nlohmann::json j = nlohmann::json::parse(read_text_file(manifest_path.string()));
  if (j.value("format", "") != "subcam-dataset") {
    throw ConfigError("dataset: unrecognized manifest format in " + root);
  }
  Dataset ds;
  ds.spec = DatasetSpec::from_json(j.at("spec"));
  ds.train = load_split_strict((fs::path(root) / "train").string());
  if (fs::exists(fs::path(root) / "eval")) {
    ds.eval = load_split_strict((fs::path(root) / "eval").string());
  }
  return ds;
}

void AugmentPolicy::validate() const {
  if (flip_prob < 0 || flip_prob > 1) throw ConfigError("augment: flip_prob must lie in [0,1]");
  if (crop_lo <= 0 || crop_lo > crop_hi || crop_hi > 1.0) {
    throw ConfigError("augment: crop range must satisfy 0 < lo <= hi <= 1");
  }
  if (jitter < 0 || jitter > 1) throw ConfigError("augment: jitter must lie in [0,1]");
  if (scale_lo <= 0 || scale_lo > scale_hi) throw ConfigError("augment: bad scale range");
}

nlohmann::json AugmentPolicy::to_json() const {
  return nlohmann::json{{"flip_prob", flip_prob}, {"crop_lo", crop_lo},   {"crop_hi", crop_hi},
                        {"jitter", jitter},       {"scale_lo", scale_lo}, {"scale_hi", scale_hi}};
}

AugmentPolicy AugmentPolicy::from_json(const nlohmann::json& j) {
  AugmentPolicy p;
  static const std::set<std::string> known = {"flip_prob", "crop_lo", "crop_hi",
                                              "jitter",    "scale_lo", "scale_hi"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("augment policy: unknown field \"" + it.key() + "\"");
  }
  p.flip_prob = j.value("flip_prob", p.flip_prob);
  p.crop_lo = j.value("crop_lo", p.crop_lo);
  p.crop_hi = j.value("crop_hi", p.crop_hi);
  p.jitter = j.value("jitter", p.jitter);
  p.scale_lo = j.value("scale_lo", p.scale_lo);
  p.scale_hi = j.value("scale_hi", p.scale_hi);
  p.validate();
  return p;
}

Sample augment(const Sample& sample, const AugmentPolicy& policy, int epoch) {
  policy.validate();
  Rng rng(substream(policy.seed, "augment", static_cast<std::uint64_t>(epoch), sample.id));
  Sample out = sample;

  if (rng.bernoulli(policy.flip_prob)) {
    out.image = hflip(out.image);
    if (out.has_mask) out.gt_mask = hflip(out.gt_mask);
  }

  const int h = out.image.height, w = out.image.width;
  const double frac = rng.uniform(policy.crop_lo, policy.crop_hi);
  const double scale = rng.uniform(policy.scale_lo, policy.scale_hi);
  const int wh = std::clamp(static_cast<int>(std::lround(h * frac / scale)), 4, h);
  const int ww = std::clamp(static_cast<int>(std::lround(w * frac / scale)), 4, w);
  const int oy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(h - wh + 1)));
  const int ox = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(w - ww + 1)));
  if (wh != h || ww != w) {
    out.image = bilinear_resize(crop(out.image, oy, ox, wh, ww), h, w);
    if (out.has_mask) out.gt_mask = nearest_resize(crop(out.gt_mask, oy, ox, wh, ww), h, w);
  }

  if (policy.jitter > 0) {
    for (int c = 0; c < out.image.channels; ++c) {
      const double gain = 1.0 + rng.uniform(-policy.jitter, policy.jitter);
      const double offset = 0.5 * rng.uniform(-policy.jitter, policy.jitter);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          out.image.at(y, x, c) = std::clamp(out.image.at(y, x, c) * gain + offset, 0.0, 1.0);
        }
    }
  }
  return out;
}

}  // namespace subcam
