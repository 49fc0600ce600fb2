#include "debias/uesf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "debias/model_classifier.hpp"
#include "debias/png_io.hpp"

namespace debias {

double DiffMap::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

DiffMap diff_map(const AttributionMask& mask_f, const AttributionMask& mask_fu) {
  if (mask_f.height != mask_fu.height || mask_f.width != mask_fu.width) {
    throw std::invalid_argument("diff_map: mask shapes differ");
  }
  DiffMap d;
  d.height = mask_f.height;
  d.width = mask_f.width;
  d.values.resize(mask_f.on.size());
  for (size_t i = 0; i < d.values.size(); ++i) {
    const double v = static_cast<double>(mask_f.on[i]) - static_cast<double>(mask_fu.on[i]);
    d.values[i] = std::clamp(v, 0.0, 1.0);
  }
  return d;
}

double background_ratio(const AttributionMask& mask, const Mask& object_mask) {
  if (mask.height != object_mask.height || mask.width != object_mask.width) {
    throw std::invalid_argument("background_ratio: shape mismatch");
  }
  size_t total = 0, outside = 0;
  for (size_t i = 0; i < mask.on.size(); ++i) {
    if (!mask.on[i]) continue;
    ++total;
    if (!object_mask.on[i]) ++outside;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(outside) / static_cast<double>(total);
}

UesfArtifacts uesf_report(const Model& baseline, const Model& unlearned,
                          const Dataset& ds, const std::vector<int>& image_indices,
                          const ExplainConfig& cfg) {
  if (baseline.norm().mean != unlearned.norm().mean ||
      baseline.norm().stddev != unlearned.norm().stddev) {
    throw std::runtime_error("uesf_report: models carry different normalization stats");
  }
  if (baseline.arch().input_size != unlearned.arch().input_size) {
    throw std::runtime_error("uesf_report: models expect different input sizes");
  }

  const ModelClassifier clf_f(baseline);
  const ModelClassifier clf_fu(unlearned);

  UesfArtifacts arts;
  double sum_ratio_f = 0.0, sum_ratio_fu = 0.0, sum_forgotten = 0.0;
  int with_ratio = 0;

  for (int idx : image_indices) {
    const ImageSample& sample = ds.samples[idx];
    const Image img = to_image(sample.pixels);

    // one segmentation and one perturbation set per image, shared across
    // both models so Eq. 3 differences segment-aligned masks
    ExplainConfig img_cfg = cfg;
    img_cfg.seed = mix_seed(cfg.seed, sample.sample_id);
    const SegmentMap seg = segment(img, img_cfg.seg, img_cfg.seed);
    Rng rng(mix_seed(img_cfg.seed, "perturb"));
    const PerturbSet perturb = draw_perturbations(img_cfg.n_samples, seg.n_segments, rng);

    const Explanation ex_f = explain_with_segments(clf_f, img, img_cfg, seg, perturb);
    const Explanation ex_fu = explain_with_segments(clf_fu, img, img_cfg, seg, perturb);

    AttributionMask mask_f = to_mask(ex_f, img_cfg.top_k);
    mask_f.source_model = "baseline";
    AttributionMask mask_fu = to_mask(ex_fu, img_cfg.top_k);
    mask_fu.source_model = "unlearned";
    const DiffMap diff = diff_map(mask_f, mask_fu);

    BiasImageRecord rec;
    rec.sample_id = sample.sample_id;
    rec.label = sample.label;
    rec.pred_baseline = ex_f.explained_class;
    rec.pred_unlearned = ex_fu.explained_class;
    rec.forgotten_area = diff.mean();
    if (sample.object_mask) {
      rec.ratio_available = true;
      rec.ratio_baseline = background_ratio(mask_f, *sample.object_mask);
      rec.ratio_unlearned = background_ratio(mask_fu, *sample.object_mask);
      sum_ratio_f += rec.ratio_baseline;
      sum_ratio_fu += rec.ratio_unlearned;
      ++with_ratio;
    }
    sum_forgotten += rec.forgotten_area;

    arts.report.images.push_back(rec);
    arts.diff_maps.push_back(diff);
    arts.masks_baseline.push_back(std::move(mask_f));
    arts.masks_unlearned.push_back(std::move(mask_fu));
  }

  arts.report.n_images = static_cast<int>(image_indices.size());
  arts.report.n_with_ratio = with_ratio;
  if (with_ratio > 0) {
    arts.report.mean_ratio_baseline = sum_ratio_f / with_ratio;
    arts.report.mean_ratio_unlearned = sum_ratio_fu / with_ratio;
  }
  if (arts.report.n_images > 0) {
    arts.report.mean_forgotten_area = sum_forgotten / arts.report.n_images;
  }
  return arts;
}

std::string bias_report_json(const BiasReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["n_images"] = report.n_images;
  j["n_with_ratio"] = report.n_with_ratio;
  j["mean_background_ratio"] = {{"baseline", report.mean_ratio_baseline},
                                {"unlearned", report.mean_ratio_unlearned}};
  j["mean_forgotten_area"] = report.mean_forgotten_area;
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (const auto& r : report.images) {
    nlohmann::ordered_json e;
    e["sample_id"] = r.sample_id;
    e["class"] = kClassNames[r.label];
    e["pred_baseline"] = kClassNames[r.pred_baseline];
    e["pred_unlearned"] = kClassNames[r.pred_unlearned];
    e["ratio_available"] = r.ratio_available;
    if (r.ratio_available) {
      e["background_ratio_baseline"] = r.ratio_baseline;
      e["background_ratio_unlearned"] = r.ratio_unlearned;
    }
    e["forgotten_area"] = r.forgotten_area;
    images.push_back(std::move(e));
  }
  j["images"] = std::move(images);
  return j.dump(2) + "\n";
}

namespace {

// gray base + colored mask tint
void paint_panel(std::vector<uint8_t>& rgb, int panel, int panels, const Image& img,
                 const std::vector<uint8_t>& mask, uint8_t tr, uint8_t tg, uint8_t tb) {
  const int h = img.height, w = img.width;
  const int stride = w * panels * 3;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      const uint8_t g = static_cast<uint8_t>(std::lround(std::clamp(img.pixels[p], 0.0, 1.0) * 255.0));
      uint8_t r = g, gg = g, b = g;
      if (!mask.empty() && mask[p]) {
        r = static_cast<uint8_t>((g + 2 * tr) / 3);
        gg = static_cast<uint8_t>((g + 2 * tg) / 3);
        b = static_cast<uint8_t>((g + 2 * tb) / 3);
      }
      const size_t off = static_cast<size_t>(y) * stride + (panel * w + x) * 3;
      rgb[off] = r;
      rgb[off + 1] = gg;
      rgb[off + 2] = b;
    }
  }
}

}  // namespace

void write_uesf_image_artifacts(const std::filesystem::path& dir,
                                const std::string& sample_id, const Image& img,
                                const AttributionMask& mask_f,
                                const AttributionMask& mask_fu, const DiffMap& diff) {
  std::filesystem::create_directories(dir);

  ImageU8 diff_png(diff.height, diff.width);
  for (size_t i = 0; i < diff.values.size(); ++i) {
    diff_png.pixels[i] = static_cast<uint8_t>(std::lround(diff.values[i] * 255.0));
  }
  write_png_gray(dir / (sample_id + "_E_final.png"), diff_png);

  std::vector<uint8_t> diff_mask(diff.values.size());
  for (size_t i = 0; i < diff.values.size(); ++i) diff_mask[i] = diff.values[i] > 0.5 ? 1 : 0;

  const int panels = 3;
  std::vector<uint8_t> rgb(static_cast<size_t>(img.height) * img.width * panels * 3);
  paint_panel(rgb, 0, panels, img, mask_f.on, 255, 64, 64);     // baseline: red
  paint_panel(rgb, 1, panels, img, mask_fu.on, 64, 255, 64);    // unlearned: green
  paint_panel(rgb, 2, panels, img, diff_mask, 255, 224, 32);    // forgotten: yellow
  write_png_rgb(dir / (sample_id + "_overlay.png"), img.height, img.width * panels, rgb);
}

}  // namespace debias
