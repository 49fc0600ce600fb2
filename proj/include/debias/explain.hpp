#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "debias/image.hpp"
#include "debias/rng.hpp"

namespace debias {

struct SegmentMap {
  int height = 0;
  int width = 0;
  int n_segments = 0;
  std::vector<int> labels;  // per pixel, in [0, n_segments)

  int at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
};

enum class SegMode { grid, slic };

SegMode seg_mode_from_string(const std::string& s);
std::string to_string(SegMode m);

struct SegParams {
  SegMode mode = SegMode::grid;
  int grid_size = 8;    // g x g tiles; trailing tiles absorb remainders
  int slic_k = 64;      // target superpixel count
  int slic_iters = 10;
  double slic_intensity_weight = 60.0;  // scales intensity against pixel coords
};

// Grid mode is fully deterministic; slic is k-means in (x, y, intensity)
// with seeded init and a connectivity pass, so every segment comes out
// nonempty and 4-connected.
SegmentMap segment(const Image& img, const SegParams& params, uint64_t seed = 0);

struct PerturbSet {
  int n = 0;
  int n_segments = 0;
  std::vector<uint8_t> rows;  // n x n_segments on/off entries; row 0 all ones
};

// i.i.d. Bernoulli(0.5) rows; requires n_samples >= n_segments + 2 so the
// surrogate system is solvable.
PerturbSet draw_perturbations(int n_samples, int n_segments, Rng& rng);

// Off segments are filled with the image mean intensity.
Image apply_perturbation(const Image& img, const SegmentMap& seg, const uint8_t* row,
                         double fill);

struct SurrogateFit {
  std::vector<double> weights;  // one per segment
  double intercept = 0.0;
  double fidelity = 0.0;  // weighted R^2, <= 1
};

// Weighted ridge regression in closed form. Sample weights are
// exp(-D^2 / kernel_width^2) with D the cosine distance from the
// all-ones row; ridge epsilon 1e-6 keeps the system nonsingular.
SurrogateFit fit_surrogate(const PerturbSet& perturb, const std::vector<double>& probs,
                           double kernel_width);

// Anything explain() can interrogate. predict_probs must return one
// probability per class.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int n_classes() const = 0;
  virtual std::vector<double> predict_probs(const Image& img) const = 0;
  // Batched hook; default fans out to predict_probs in parallel.
  virtual std::vector<std::vector<double>> predict_probs_batch(
      const std::vector<Image>& images) const;
};

struct ExplainConfig {
  int n_samples = 1000;
  double kernel_width = 0.25;
  SegParams seg;
  int top_k = 8;
  uint64_t seed = 0;
};

struct Explanation {
  SegmentMap segments;
  std::vector<double> weights;
  double intercept = 0.0;
  int explained_class = 0;
  double fidelity = 0.0;
  ExplainConfig cfg;
};

// Explains the model's predicted class for this image. Deterministic
// given (model, image, cfg).
Explanation explain(const Classifier& model, const Image& img, const ExplainConfig& cfg);

// Same but on a caller-supplied segment map (the uesf path shares one map
// and one perturbation set across two models).
Explanation explain_with_segments(const Classifier& model, const Image& img,
                                  const ExplainConfig& cfg, const SegmentMap& seg,
                                  const PerturbSet& perturb);

struct AttributionMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> on;
  int top_k = 0;
  std::string source_model;

  size_t count() const;
};

// Union of the top_k positive-weight segments, descending weight, ties to
// the lower segment id. Nonpositive weights never enter the mask.
AttributionMask to_mask(const Explanation& ex, int top_k);

}  // namespace debias
