#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "debias/dataset.hpp"
#include "debias/model.hpp"

namespace debias {

// rows = true class, cols = predicted, fixed alphabetical class order.
struct ConfusionMatrix {
  std::array<std::array<int64_t, kNumClasses>, kNumClasses> counts{};

  int64_t total() const;
  int64_t trace() const;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& labels,
                                 const std::vector<int>& predictions);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t support = 0;
  bool zero_precision_denominator = false;  // no predicted instances
  bool zero_recall_denominator = false;     // no true instances
};

struct ClassReport {
  std::array<ClassMetrics, kNumClasses> per_class;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Zero-denominator cells yield 0 with the corresponding flag set.
ClassReport classification_report(const ConfusionMatrix& cm);

std::string report_json(const ClassReport& report);
std::string confusion_json(const ConfusionMatrix& cm);

struct SwapEvalResult {
  double in_dist_accuracy = 0.0;
  double swapped_accuracy = 0.0;
  double gap() const { return in_dist_accuracy - swapped_accuracy; }
};

// Predictor over a batch of rendered images. sample_indices index into
// ds.samples; texture_ids carry the texture each image was actually
// rendered with (swapped id for the swapped set) so test fixtures can
// build texture-lookup oracles.
using BatchPredictor = std::function<std::vector<int>(
    const std::vector<int>& sample_indices, const std::vector<Image>& images,
    const std::vector<int>& texture_ids)>;

// Re-renders every evaluated image with its background texture replaced
// by a uniformly random different one (glyph and speckle pinned by the
// sample's render seed) and measures accuracy on both versions. Only
// available for generated datasets, which carry render seeds.
SwapEvalResult background_swap_eval(const Model& model, const Dataset& ds,
                                    const std::vector<int>& indices);
SwapEvalResult background_swap_eval(const BatchPredictor& predict, const Dataset& ds,
                                    const std::vector<int>& indices);

// Prediction helper shared by eval paths: sequential batches, no
// augmentation.
std::vector<int> predict_indices(const Model& model, const Dataset& ds,
                                 const std::vector<int>& indices, int batch_size = 16);

struct EmbeddingRow {
  std::string sample_id;
  int label = 0;
  std::vector<double> values;
};

std::vector<EmbeddingRow> export_embeddings(const Model& model, const Dataset& ds,
                                            const std::vector<int>& indices,
                                            int batch_size = 16);

std::string embeddings_csv(const std::vector<EmbeddingRow>& rows);

struct PcaResult {
  std::vector<double> mean;               // length d
  std::vector<std::vector<double>> components;  // dims x d, unit norm
  std::vector<double> eigenvalues;        // descending, length dims
  std::vector<std::array<double, 2>> coords;    // n x 2 when dims == 2
};

// Covariance eigendecomposition (cyclic Jacobi); components sorted by
// descending eigenvalue with the largest-magnitude coordinate positive.
PcaResult pca_project(const std::vector<std::vector<double>>& rows, int dims = 2);

std::string pca_csv(const std::vector<EmbeddingRow>& rows, const PcaResult& pca);

}  // namespace debias
