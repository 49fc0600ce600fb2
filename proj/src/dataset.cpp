#include "debias/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "debias/png_io.hpp"

namespace debias {

namespace {

using ordered_json = nlohmann::ordered_json;

// ---- texture families ----------------------------------------------------
//
// One family per class id. Families differ in dominant orientation and
// frequency so a small conv net can tell them apart; per-image phases and
// wavelengths vary so images within a family are not copies.

void render_ripples(Image& img, Rng& rng, bool diagonal) {
  const double base = rng.uniform(0.42, 0.52);
  const double amp = rng.uniform(0.10, 0.15);
  const double wavelength = rng.uniform(9.0, 14.0);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double bend_wavelength = rng.uniform(40.0, 80.0);
  const double bend_phase = rng.uniform(0.0, 2.0 * M_PI);
  const double bend = rng.uniform(0.4, 1.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double u = diagonal ? (x + y) * M_SQRT1_2 : static_cast<double>(y);
      const double v = diagonal ? (x - y) * M_SQRT1_2 : static_cast<double>(x);
      const double warp = bend * std::sin(2.0 * M_PI * v / bend_wavelength + bend_phase);
      img.at(y, x) = base + amp * std::sin(2.0 * M_PI * u / wavelength + phase + warp);
    }
  }
}

void render_fine_grain(Image& img, Rng& rng) {
  const double base = rng.uniform(0.42, 0.52);
  const double amp = rng.uniform(0.12, 0.18);
  const int h = img.height, w = img.width;
  std::vector<double> noise(static_cast<size_t>(h) * w);
  for (auto& v : noise) v = rng.uniform() - 0.5;
  // one 3x3 box pass: keeps grain fine but kills single-pixel salt
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          acc += noise[static_cast<size_t>(yy) * w + xx];
        }
      }
      img.at(y, x) = base + amp * (acc / 9.0) * 3.0;
    }
  }
}

// Value noise: random lattice, bilinear interpolation.
void render_blobs(Image& img, Rng& rng) {
  const double base = rng.uniform(0.40, 0.50);
  const double amp = rng.uniform(0.12, 0.18);
  const double cell = rng.uniform(24.0, 36.0);
  const int gw = static_cast<int>(img.width / cell) + 2;
  const int gh = static_cast<int>(img.height / cell) + 2;
  std::vector<double> grid(static_cast<size_t>(gh) * gw);
  for (auto& v : grid) v = rng.uniform();
  for (int y = 0; y < img.height; ++y) {
    const double fy = y / cell;
    const int y0 = static_cast<int>(fy);
    const double wy = fy - y0;
    for (int x = 0; x < img.width; ++x) {
      const double fx = x / cell;
      const int x0 = static_cast<int>(fx);
      const double wx = fx - x0;
      const double v00 = grid[static_cast<size_t>(y0) * gw + x0];
      const double v01 = grid[static_cast<size_t>(y0) * gw + x0 + 1];
      const double v10 = grid[static_cast<size_t>(y0 + 1) * gw + x0];
      const double v11 = grid[static_cast<size_t>(y0 + 1) * gw + x0 + 1];
      const double v = (v00 * (1 - wx) + v01 * wx) * (1 - wy) + (v10 * (1 - wx) + v11 * wx) * wy;
      img.at(y, x) = base + amp * (2.0 * v - 1.0);
    }
  }
}

void render_streaks(Image& img, Rng& rng) {
  const double base = rng.uniform(0.42, 0.52);
  const double amp = rng.uniform(0.12, 0.18);
  const double cell = rng.uniform(10.0, 16.0);
  const int gw = static_cast<int>(img.width / cell) + 2;
  std::vector<double> grid(gw);
  for (auto& v : grid) v = rng.uniform();
  std::vector<double> wobble(img.height);
  const double wob_wavelength = rng.uniform(60.0, 120.0);
  const double wob_phase = rng.uniform(0.0, 2.0 * M_PI);
  for (int y = 0; y < img.height; ++y) {
    wobble[y] = 2.0 * std::sin(2.0 * M_PI * y / wob_wavelength + wob_phase);
  }
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double fx = (x + wobble[y]) / cell;
      const double fc = std::max(0.0, fx);
      const int x0 = std::min(static_cast<int>(fc), gw - 2);
      const double wx = fc - x0;
      const double v = grid[x0] * (1 - wx) + grid[x0 + 1] * wx;
      img.at(y, x) = base + amp * (2.0 * v - 1.0);
    }
  }
}

void render_texture(Image& img, int texture_id, Rng& rng) {
  switch (texture_id) {
    case 0: render_ripples(img, rng, /*diagonal=*/false); break;
    case 1: render_ripples(img, rng, /*diagonal=*/true); break;
    case 2: render_fine_grain(img, rng); break;
    case 3: render_blobs(img, rng); break;
    case 4: render_streaks(img, rng); break;
    default: throw std::invalid_argument("texture id out of range");
  }
}

// ---- glyphs ---------------------------------------------------------------

// Membership test in the glyph's unit frame (roughly |u|,|v| <= 1).
bool glyph_member(int label, double u, double v) {
  auto in_ellipse = [](double x, double y, double cx, double cy, double ax, double ay) {
    const double dx = (x - cx) / ax;
    const double dy = (y - cy) / ay;
    return dx * dx + dy * dy <= 1.0;
  };
  switch (label) {
    case 0:  // human: head lobe + body lobe
      return in_ellipse(u, v, 0.0, -0.55, 0.24, 0.24) ||
             in_ellipse(u, v, 0.0, 0.18, 0.30, 0.64);
    case 1:  // mine: sphere
      return in_ellipse(u, v, 0.0, 0.0, 0.62, 0.62);
    case 2:  // plane: fuselage + wings
      return in_ellipse(u, v, 0.0, 0.0, 0.92, 0.20) ||
             in_ellipse(u, v, 0.0, 0.0, 0.24, 0.80);
    case 4:  // ship: elongated hull
      return in_ellipse(u, v, 0.0, 0.0, 0.95, 0.26);
    default:
      return false;
  }
}

struct GlyphPose {
  double cx, cy;      // center, pixels
  double radius;      // unit-frame scale, pixels
  double angle;       // radians
  double shadow_dx;   // shadow offset, pixels
  double shadow_dy;
  double brightness;  // highlight intensity
};

GlyphPose sample_glyph_pose(Rng& rng, int image_size) {
  GlyphPose p;
  p.radius = rng.uniform(0.14, 0.19) * image_size;
  p.cx = rng.uniform(0.32, 0.60) * image_size;
  p.cy = rng.uniform(0.32, 0.68) * image_size;
  p.angle = rng.uniform(0.0, 2.0 * M_PI);
  const double shadow_angle = rng.uniform(-0.25, 0.25);
  const double shadow_dist = rng.uniform(1.0, 1.35) * p.radius;
  p.shadow_dx = shadow_dist * std::cos(shadow_angle);
  p.shadow_dy = shadow_dist * std::sin(shadow_angle);
  p.brightness = rng.uniform(0.82, 0.92);
  return p;
}

void compose_glyph(Image& img, Mask& mask, int label, const GlyphPose& pose) {
  const double cosr = std::cos(-pose.angle);
  const double sinr = std::sin(-pose.angle);
  auto to_unit = [&](double px, double py, double cx, double cy, double& u, double& v) {
    const double dx = (px - cx) / pose.radius;
    const double dy = (py - cy) / pose.radius;
    u = cosr * dx - sinr * dy;
    v = sinr * dx + cosr * dy;
  };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double u, v;
      to_unit(x, y, pose.cx + pose.shadow_dx, pose.cy + pose.shadow_dy, u, v);
      const bool in_shadow = glyph_member(label, u, v);
      to_unit(x, y, pose.cx, pose.cy, u, v);
      const bool in_glyph = glyph_member(label, u, v);
      if (in_glyph) {
        img.at(y, x) = pose.brightness;
      } else if (in_shadow) {
        img.at(y, x) *= 0.22;  // acoustic shadow: background nearly blanked
      }
      if (in_glyph || in_shadow) mask.at(y, x) = 1;
    }
  }
}

void apply_speckle(Image& img, double variance, Rng& rng) {
  if (variance <= 0.0) return;
  const double sigma = std::sqrt(variance);
  for (auto& p : img.pixels) {
    p = std::clamp(p * (1.0 + sigma * rng.normal()), 0.0, 1.0);
  }
}

std::string format_sample_id(int label, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%05d", std::string(kClassNames[label]).c_str(), index);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_per_class < 1) throw std::invalid_argument("n_per_class must be >= 1");
  if (image_size < 32) throw std::invalid_argument("image_size must be >= 32");
  if (bias_strength < 0.0 || bias_strength > 1.0) {
    throw std::invalid_argument("bias_strength must be in [0, 1]");
  }
  if (noise_level < 0.0) throw std::invalid_argument("noise_level must be >= 0");
}

ImageU8 render_scene(int label, int texture_id, uint64_t render_seed, int image_size,
                     double noise_level, Mask* mask_out) {
  // Independent streams so changing the texture id (or family) leaves the
  // glyph pose and the speckle field untouched.
  Rng tex_rng(mix_seed(render_seed, "texture"));
  Rng glyph_rng(mix_seed(render_seed, "glyph"));
  Rng noise_rng(mix_seed(render_seed, "speckle"));

  Image img(image_size, image_size);
  Mask mask(image_size, image_size);
  render_texture(img, texture_id, tex_rng);
  if (label != kSeafloorClass) {
    const GlyphPose pose = sample_glyph_pose(glyph_rng, image_size);
    compose_glyph(img, mask, label, pose);
  }
  apply_speckle(img, noise_level, noise_rng);
  if (mask_out) *mask_out = std::move(mask);
  return quantize(img);
}

std::vector<ImageSample> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::vector<ImageSample> samples;
  samples.reserve(static_cast<size_t>(spec.n_per_class) * kNumClasses);
  for (int label = 0; label < kNumClasses; ++label) {
    for (int i = 0; i < spec.n_per_class; ++i) {
      ImageSample s;
      s.sample_id = format_sample_id(label, i);
      s.label = label;
      s.render_seed = mix_seed(spec.seed, static_cast<uint64_t>(label),
                               static_cast<uint64_t>(i));

      Rng pick_rng(mix_seed(s.render_seed, "texpick"));
      if (label == kSeafloorClass) {
        s.texture_id = static_cast<int>(pick_rng.uniform_int(kNumTextures));
      } else if (pick_rng.bernoulli(spec.bias_strength)) {
        s.texture_id = label;  // class-correlated background
      } else {
        int t = static_cast<int>(pick_rng.uniform_int(kNumTextures - 1));
        if (t >= label) ++t;
        s.texture_id = t;
      }

      Mask mask;
      s.pixels = render_scene(label, s.texture_id, s.render_seed, spec.image_size,
                              spec.noise_level, &mask);
      s.object_mask = std::move(mask);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

Image preprocess(const Image& raw, int target) {
  if (raw.height <= 0 || raw.width <= 0 || raw.pixels.empty()) {
    throw std::invalid_argument("preprocess: zero-area image");
  }
  for (double v : raw.pixels) {
    if (!std::isfinite(v)) throw std::invalid_argument("preprocess: non-finite pixel");
  }
  Image out = resize_bilinear(raw, target, target);
  for (auto& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Normalization compute_normalization(const std::vector<const ImageU8*>& images) {
  double sum = 0.0, sum_sq = 0.0;
  size_t count = 0;
  for (const auto* img : images) {
    for (uint8_t p : img->pixels) {
      const double v = p / 255.0;
      sum += v;
      sum_sq += v * v;
    }
    count += img->pixels.size();
  }
  if (count == 0) throw std::invalid_argument("compute_normalization: no pixels");
  Normalization n;
  n.mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - n.mean * n.mean);
  n.stddev = std::max(std::sqrt(var), 1e-6);
  return n;
}

Normalization compute_normalization(const Dataset& ds) {
  std::vector<const ImageU8*> imgs;
  for (int idx : ds.split_indices("train")) imgs.push_back(&ds.samples[idx].pixels);
  return compute_normalization(imgs);
}

AugmentParams sample_augment_params(Rng& rng) {
  AugmentParams p;
  p.flip_h = rng.bernoulli(0.5);
  p.flip_v = rng.bernoulli(0.5);
  p.angle_deg = rng.uniform(-15.0, 15.0);
  p.scale = rng.uniform(0.9, 1.1);
  return p;
}

namespace {

struct InverseAffine {
  // maps output pixel -> input pixel around the image center
  double m00, m01, m10, m11, cx, cy;

  static InverseAffine from(const AugmentParams& p_in, int height, int width) {
    AugmentParams p = p_in;
    p.angle_deg = std::clamp(p.angle_deg, -15.0, 15.0);
    p.scale = std::clamp(p.scale, 0.9, 1.1);
    const double theta = p.angle_deg * M_PI / 180.0;
    const double inv_s = 1.0 / p.scale;
    const double c = std::cos(-theta), s = std::sin(-theta);
    InverseAffine a;
    // inverse of (rotate . scale . flip) = flip . scale^-1 . rotate^-1
    const double fx = p.flip_h ? -1.0 : 1.0;
    const double fy = p.flip_v ? -1.0 : 1.0;
    a.m00 = fx * inv_s * c;
    a.m01 = fx * inv_s * -s;
    a.m10 = fy * inv_s * s;
    a.m11 = fy * inv_s * c;
    a.cx = (width - 1) / 2.0;
    a.cy = (height - 1) / 2.0;
    return a;
  }

  void map(double x, double y, double& sx, double& sy) const {
    const double dx = x - cx, dy = y - cy;
    sx = cx + m00 * dx + m01 * dy;
    sy = cy + m10 * dx + m11 * dy;
  }
};

}  // namespace

Image apply_augment(const Image& img, const AugmentParams& p) {
  const InverseAffine inv = InverseAffine::from(p, img.height, img.width);
  Image out(img.height, img.width);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double sx, sy;
      inv.map(x, y, sx, sy);
      sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
      sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const int y1 = std::min(y0 + 1, img.height - 1);
      const double wx = sx - x0, wy = sy - y0;
      const double top = img.at(y0, x0) * (1 - wx) + img.at(y0, x1) * wx;
      const double bot = img.at(y1, x0) * (1 - wx) + img.at(y1, x1) * wx;
      out.at(y, x) = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

Mask apply_augment_mask(const Mask& mask, const AugmentParams& p) {
  const InverseAffine inv = InverseAffine::from(p, mask.height, mask.width);
  Mask out(mask.height, mask.width);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double sx, sy;
      inv.map(x, y, sx, sy);
      const int xi = static_cast<int>(std::lround(sx));
      const int yi = static_cast<int>(std::lround(sy));
      if (xi < 0 || xi >= mask.width || yi < 0 || yi >= mask.height) continue;
      out.at(y, x) = mask.at(yi, xi);
    }
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<ImageSample>& samples,
                           const SplitRatios& ratios, uint64_t seed) {
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  double total = 0.0;
  for (double v : r) {
    if (v <= 0.0) throw std::invalid_argument("split ratios must be positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }

  std::map<int, std::vector<std::string>> by_class;
  for (const auto& s : samples) by_class[s.label].push_back(s.sample_id);

  DatasetSplit split;
  split.ratios = ratios;
  split.seed = seed;
  for (auto& [label, ids] : by_class) {
    const int n = static_cast<int>(ids.size());
    if (n < 3) {
      throw std::invalid_argument("class " + std::string(kClassNames[label]) +
                                  " has fewer than 3 samples; cannot populate all splits");
    }
    int counts[3];
    double fracs[3];
    int assigned = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = n * r[k];
      counts[k] = static_cast<int>(std::floor(exact));
      fracs[k] = exact - counts[k];
      assigned += counts[k];
    }
    for (int left = n - assigned; left > 0; --left) {
      int best = 0;
      for (int k = 1; k < 3; ++k) {
        if (fracs[k] > fracs[best]) best = k;
      }
      ++counts[best];
      fracs[best] = -1.0;
    }
    // every bucket gets at least one sample (n >= 3 makes this feasible)
    for (int k = 0; k < 3; ++k) {
      while (counts[k] == 0) {
        int donor = 0;
        for (int j = 1; j < 3; ++j) {
          if (counts[j] > counts[donor]) donor = j;
        }
        --counts[donor];
        ++counts[k];
      }
    }

    Rng rng(mix_seed(mix_seed(seed, "split"), static_cast<uint64_t>(label)));
    rng.shuffle(ids);
    int pos = 0;
    for (int k = 0; k < 3; ++k) {
      auto& bucket = (k == 0) ? split.train : (k == 1) ? split.val : split.test;
      for (int i = 0; i < counts[k]; ++i) bucket.push_back(ids[pos++]);
    }
  }
  // keep bucket contents in a canonical order for byte-stable manifests
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

const ImageSample& Dataset::by_id(const std::string& sample_id) const {
  return samples[index_of(sample_id)];
}

int Dataset::index_of(const std::string& sample_id) const {
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].sample_id == sample_id) return static_cast<int>(i);
  }
  throw std::out_of_range("unknown sample_id: " + sample_id);
}

std::vector<int> Dataset::split_indices(const std::string& which) const {
  const std::vector<std::string>* ids = nullptr;
  if (which == "train") ids = &split.train;
  else if (which == "val") ids = &split.val;
  else if (which == "test") ids = &split.test;
  else throw std::invalid_argument("unknown split: " + which);
  std::vector<int> out;
  out.reserve(ids->size());
  for (const auto& id : *ids) out.push_back(index_of(id));
  return out;
}

namespace {

std::string split_of(const Dataset& ds, const std::string& id) {
  if (std::binary_search(ds.split.train.begin(), ds.split.train.end(), id)) return "train";
  if (std::binary_search(ds.split.val.begin(), ds.split.val.end(), id)) return "val";
  if (std::binary_search(ds.split.test.begin(), ds.split.test.end(), id)) return "test";
  return "none";
}

}  // namespace

std::string manifest_json(const Dataset& ds) {
  ordered_json j;
  j["format_version"] = 1;
  j["generator"] = {{"n_per_class", ds.spec.n_per_class},
                    {"image_size", ds.spec.image_size},
                    {"bias_strength", ds.spec.bias_strength},
                    {"noise_level", ds.spec.noise_level},
                    {"seed", ds.spec.seed}};
  j["classes"] = kClassNames;
  j["normalization"] = {{"mean", ds.norm.mean}, {"std", ds.norm.stddev}};
  j["split"] = {{"ratios", {ds.split.ratios.train, ds.split.ratios.val, ds.split.ratios.test}},
                {"seed", ds.split.seed}};
  ordered_json samples = ordered_json::array();
  for (const auto& s : ds.samples) {
    const std::string cls(kClassNames[s.label]);
    ordered_json e;
    e["sample_id"] = s.sample_id;
    e["class"] = cls;
    e["texture_id"] = s.texture_id;
    e["render_seed"] = s.render_seed;
    e["image"] = cls + "/" + s.sample_id + ".png";
    e["mask"] = s.object_mask ? ordered_json(cls + "/" + s.sample_id + "_mask.png")
                              : ordered_json(nullptr);
    e["split"] = split_of(ds, s.sample_id);
    samples.push_back(std::move(e));
  }
  j["samples"] = std::move(samples);
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& name : kClassNames) fs::create_directories(dir / name);
  for (const auto& s : ds.samples) {
    const fs::path cls_dir = dir / kClassNames[s.label];
    write_png_gray(cls_dir / (s.sample_id + ".png"), s.pixels);
    if (s.object_mask) {
      ImageU8 m(s.object_mask->height, s.object_mask->width);
      for (size_t i = 0; i < m.pixels.size(); ++i) {
        m.pixels[i] = s.object_mask->on[i] ? 255 : 0;
      }
      write_png_gray(cls_dir / (s.sample_id + "_mask.png"), m);
    }
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << manifest_json(ds);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
  ordered_json j = ordered_json::parse(in);
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("unsupported manifest format_version");
  }

  Dataset ds;
  const auto& g = j.at("generator");
  ds.spec.n_per_class = g.at("n_per_class").get<int>();
  ds.spec.image_size = g.at("image_size").get<int>();
  ds.spec.bias_strength = g.at("bias_strength").get<double>();
  ds.spec.noise_level = g.at("noise_level").get<double>();
  ds.spec.seed = g.at("seed").get<uint64_t>();
  ds.norm.mean = j.at("normalization").at("mean").get<double>();
  ds.norm.stddev = j.at("normalization").at("std").get<double>();
  const auto& sp = j.at("split");
  ds.split.ratios.train = sp.at("ratios")[0].get<double>();
  ds.split.ratios.val = sp.at("ratios")[1].get<double>();
  ds.split.ratios.test = sp.at("ratios")[2].get<double>();
  ds.split.seed = sp.at("seed").get<uint64_t>();

  for (const auto& e : j.at("samples")) {
    ImageSample s;
    s.sample_id = e.at("sample_id").get<std::string>();
    s.label = class_id_from_name(e.at("class").get<std::string>());
    s.texture_id = e.at("texture_id").get<int>();
    s.render_seed = e.at("render_seed").get<uint64_t>();
    s.pixels = read_png_gray(dir / e.at("image").get<std::string>());
    if (!e.at("mask").is_null()) {
      ImageU8 m = read_png_gray(dir / e.at("mask").get<std::string>());
      Mask mask(m.height, m.width);
      for (size_t i = 0; i < m.pixels.size(); ++i) mask.on[i] = m.pixels[i] >= 128 ? 1 : 0;
      s.object_mask = std::move(mask);
    }
    const std::string split_name = e.at("split").get<std::string>();
    if (split_name == "train") ds.split.train.push_back(s.sample_id);
    else if (split_name == "val") ds.split.val.push_back(s.sample_id);
    else if (split_name == "test") ds.split.test.push_back(s.sample_id);
    ds.samples.push_back(std::move(s));
  }
  std::sort(ds.split.train.begin(), ds.split.train.end());
  std::sort(ds.split.val.begin(), ds.split.val.end());
  std::sort(ds.split.test.begin(), ds.split.test.end());
  return ds;
}

}  // namespace debias
