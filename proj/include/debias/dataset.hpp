#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "debias/image.hpp"
#include "debias/rng.hpp"

namespace debias {

constexpr int kImageSize = 224;
constexpr int kNumTextures = 5;

// Parameters for the synthetic sonar-style generator. bias_strength is
// the probability that an object-class image is rendered on its
// class-correlated background texture; the remaining mass is spread
// uniformly over the other textures. Seafloor images draw their texture
// uniformly from all families, so the background class spans every
// texture regardless of bias.
struct SynthSpec {
  int n_per_class = 200;
  int image_size = kImageSize;
  double bias_strength = 1.0;
  double noise_level = 0.01;  // speckle variance
  uint64_t seed = 7;

  void validate() const;
};

struct ImageSample {
  std::string sample_id;
  int label = 0;
  int texture_id = 0;
  uint64_t render_seed = 0;  // pins glyph pose and noise; lets eval re-render
                             // the same scene on a different texture
  ImageU8 pixels;
  std::optional<Mask> object_mask;
};

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct DatasetSplit {
  std::vector<std::string> train, val, test;
  SplitRatios ratios;
  uint64_t seed = 0;
};

struct Normalization {
  double mean = 0.0;
  double stddev = 1.0;
};

struct Dataset {
  SynthSpec spec;
  std::vector<ImageSample> samples;
  DatasetSplit split;
  Normalization norm;

  const ImageSample& by_id(const std::string& sample_id) const;
  int index_of(const std::string& sample_id) const;
  std::vector<int> split_indices(const std::string& which) const;  // "train"|"val"|"test"
};

// --- generation ---------------------------------------------------------

std::vector<ImageSample> generate_synthetic(const SynthSpec& spec);

// Re-renders one sample's scene (same glyph pose, same noise field) on a
// possibly different texture. The basis of the background-swap test.
ImageU8 render_scene(int label, int texture_id, uint64_t render_seed, int image_size,
                     double noise_level, Mask* mask_out = nullptr);

// --- preprocessing ------------------------------------------------------

// Bilinear resize to target x target and clamp to [0, 1]. Raw inputs are
// expected in [0, 1] already (the PNG loader divides by 255); values
// outside are clamped. Rejects empty or non-finite input.
Image preprocess(const Image& raw, int target = kImageSize);

// Training-split pixel statistics, frozen into the manifest. Model input
// is (x - mean) / stddev.
Normalization compute_normalization(const Dataset& ds);
Normalization compute_normalization(const std::vector<const ImageU8*>& images);

// --- augmentation -------------------------------------------------------

struct AugmentParams {
  bool flip_h = false;
  bool flip_v = false;
  double angle_deg = 0.0;  // clamped to [-15, 15]
  double scale = 1.0;      // clamped to [0.9, 1.1]
};

AugmentParams sample_augment_params(Rng& rng);
Image apply_augment(const Image& img, const AugmentParams& p);   // bilinear, edge clamp
Mask apply_augment_mask(const Mask& mask, const AugmentParams& p);  // nearest, zero fill

// --- split ----------------------------------------------------------------

// Stratified split. Per class: floor(n * ratio) per bucket, leftovers by
// largest fractional remainder (ties to the earlier bucket), then every
// bucket is topped up to at least one sample by borrowing from the
// largest. Rejects classes with fewer than 3 samples.
DatasetSplit split_dataset(const std::vector<ImageSample>& samples,
                           const SplitRatios& ratios, uint64_t seed);

// --- disk format ----------------------------------------------------------

// Directory layout: one subdirectory per class holding <id>.png and
// <id>_mask.png, plus manifest.json at the root.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

std::string manifest_json(const Dataset& ds);  // serialized manifest bytes

}  // namespace debias
