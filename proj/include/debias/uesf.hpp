#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "debias/dataset.hpp"
#include "debias/explain.hpp"
#include "debias/model.hpp"

namespace debias {

// clip(M_f - M_fu, 0, 1): regions the baseline credited that the
// unlearned model abandoned. Binary-valued under binary masks; the type
// tolerates [0,1] for a future soft-mask mode.
struct DiffMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double mean() const;
};

DiffMap diff_map(const AttributionMask& mask_f, const AttributionMask& mask_fu);

// Fraction of attribution outside the ground-truth object. Empty mask is
// defined as 0: no attribution at all means no background attribution.
double background_ratio(const AttributionMask& mask, const Mask& object_mask);

struct BiasImageRecord {
  std::string sample_id;
  int label = 0;
  int pred_baseline = 0;
  int pred_unlearned = 0;
  bool ratio_available = false;
  double ratio_baseline = 0.0;
  double ratio_unlearned = 0.0;
  double forgotten_area = 0.0;  // mean of the diff map
};

struct BiasReport {
  int n_images = 0;
  int n_with_ratio = 0;
  double mean_ratio_baseline = 0.0;
  double mean_ratio_unlearned = 0.0;
  double mean_forgotten_area = 0.0;
  std::vector<BiasImageRecord> images;
};

struct UesfArtifacts {
  BiasReport report;
  std::vector<DiffMap> diff_maps;                   // parallel to report.images
  std::vector<AttributionMask> masks_baseline;
  std::vector<AttributionMask> masks_unlearned;
};

// Explains both models per image with one shared segment map and one
// shared perturbation set, then differences the attribution masks.
// Refuses model pairs with mismatched normalization stats.
UesfArtifacts uesf_report(const Model& baseline, const Model& unlearned,
                          const Dataset& ds, const std::vector<int>& image_indices,
                          const ExplainConfig& cfg);

std::string bias_report_json(const BiasReport& report);

// Per-image PNGs: E_final plus a three-panel overlay (baseline mask,
// unlearned mask, difference).
void write_uesf_image_artifacts(const std::filesystem::path& dir,
                                const std::string& sample_id, const Image& img,
                                const AttributionMask& mask_f,
                                const AttributionMask& mask_fu, const DiffMap& diff);

}  // namespace debias
