#pragma once

#include <cstdint>
#include <vector>

namespace debias {

// Training objective pieces. CE and the triplet term are both batch
// means; the combined objective is total = ce + lambda * triplet.
struct LossValue {
  double ce = 0.0;
  double triplet = 0.0;
  double total = 0.0;
};

struct HyperParams {
  double margin = 1.0;   // alpha > 0
  double lambda = 1.0;   // > 0
  double lr = 1e-4;
  int epochs = 20;
  int batch_size = 16;
  uint64_t seed = 7;

  void validate() const;
};

// Mean over rows of -log softmax(logits)[label]; max-subtraction for
// stability. Throws on non-finite logits or out-of-range labels.
double cross_entropy(const std::vector<double>& logits, const std::vector<int>& labels,
                     int n_classes);

// d(mean CE)/d(logits), same shape as logits.
std::vector<double> cross_entropy_backward(const std::vector<double>& logits,
                                           const std::vector<int>& labels, int n_classes);

// Mean over triplets of max(0, |za-zp|^2 - |za-zn|^2 + margin), squared
// Euclidean distances. za/zp/zn are n x dim row-major.
double triplet_loss(const std::vector<double>& za, const std::vector<double>& zp,
                    const std::vector<double>& zn, int n, int dim, double margin);

// Subgradient 0 at the hinge kink. Outputs have the same layout as inputs.
void triplet_loss_backward(const std::vector<double>& za, const std::vector<double>& zp,
                           const std::vector<double>& zn, int n, int dim, double margin,
                           std::vector<double>& ga, std::vector<double>& gp,
                           std::vector<double>& gn);

LossValue total_loss(double ce, double triplet, double lambda);

std::vector<double> softmax(const std::vector<double>& logits, int n_classes);

}  // namespace debias
