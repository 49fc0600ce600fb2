#include "debias/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace debias {

void HyperParams::validate() const {
  if (margin <= 0.0) throw std::invalid_argument("margin must be > 0");
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
  if (lr <= 0.0) throw std::invalid_argument("lr must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

double cross_entropy(const std::vector<double>& logits, const std::vector<int>& labels,
                     int n_classes) {
  const size_t n = labels.size();
  if (logits.size() != n * n_classes) {
    throw std::invalid_argument("cross_entropy: logits/labels size mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * n_classes;
    const int y = labels[i];
    if (y < 0 || y >= n_classes) throw std::invalid_argument("cross_entropy: bad label");
    double m = row[0];
    for (int j = 0; j < n_classes; ++j) {
      if (!std::isfinite(row[j])) throw std::invalid_argument("cross_entropy: non-finite logit");
      m = std::max(m, row[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < n_classes; ++j) sum += std::exp(row[j] - m);
    acc += std::log(sum) - (row[y] - m);
  }
  return acc / static_cast<double>(n);
}

std::vector<double> cross_entropy_backward(const std::vector<double>& logits,
                                           const std::vector<int>& labels, int n_classes) {
  const size_t n = labels.size();
  std::vector<double> grad(logits.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * n_classes;
    double* grow = grad.data() + i * n_classes;
    double m = row[0];
    for (int j = 0; j < n_classes; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n_classes; ++j) sum += std::exp(row[j] - m);
    for (int j = 0; j < n_classes; ++j) {
      grow[j] = std::exp(row[j] - m) / sum * inv_n;
    }
    grow[labels[i]] -= inv_n;
  }
  return grad;
}

namespace {

double sq_dist(const double* a, const double* b, int dim) {
  double acc = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

}  // namespace

double triplet_loss(const std::vector<double>& za, const std::vector<double>& zp,
                    const std::vector<double>& zn, int n, int dim, double margin) {
  if (margin <= 0.0) throw std::invalid_argument("triplet_loss: margin must be > 0");
  const size_t want = static_cast<size_t>(n) * dim;
  if (za.size() != want || zp.size() != want || zn.size() != want) {
    throw std::invalid_argument("triplet_loss: embedding batch size mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* a = za.data() + static_cast<size_t>(i) * dim;
    const double* p = zp.data() + static_cast<size_t>(i) * dim;
    const double* q = zn.data() + static_cast<size_t>(i) * dim;
    acc += std::max(0.0, sq_dist(a, p, dim) - sq_dist(a, q, dim) + margin);
  }
  return acc / static_cast<double>(n);
}

void triplet_loss_backward(const std::vector<double>& za, const std::vector<double>& zp,
                           const std::vector<double>& zn, int n, int dim, double margin,
                           std::vector<double>& ga, std::vector<double>& gp,
                           std::vector<double>& gn) {
  const size_t want = static_cast<size_t>(n) * dim;
  ga.assign(want, 0.0);
  gp.assign(want, 0.0);
  gn.assign(want, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const size_t off = static_cast<size_t>(i) * dim;
    const double* a = za.data() + off;
    const double* p = zp.data() + off;
    const double* q = zn.data() + off;
    const double pre = sq_dist(a, p, dim) - sq_dist(a, q, dim) + margin;
    if (pre <= 0.0) continue;  // inactive (or kink): subgradient 0
    for (int k = 0; k < dim; ++k) {
      ga[off + k] += 2.0 * (q[k] - p[k]) * inv_n;
      gp[off + k] += 2.0 * (p[k] - a[k]) * inv_n;
      gn[off + k] += 2.0 * (a[k] - q[k]) * inv_n;
    }
  }
}

LossValue total_loss(double ce, double triplet, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("total_loss: lambda must be > 0");
  if (!std::isfinite(ce) || !std::isfinite(triplet)) {
    throw std::invalid_argument("total_loss: non-finite component");
  }
  LossValue v;
  v.ce = ce;
  v.triplet = triplet;
  v.total = ce + lambda * triplet;
  return v;
}

std::vector<double> softmax(const std::vector<double>& logits, int n_classes) {
  const size_t n = logits.size() / n_classes;
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * n_classes;
    double* orow = out.data() + i * n_classes;
    double m = row[0];
    for (int j = 0; j < n_classes; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n_classes; ++j) {
      orow[j] = std::exp(row[j] - m);
      sum += orow[j];
    }
    for (int j = 0; j < n_classes; ++j) orow[j] /= sum;
  }
  return out;
}

}  // namespace debias
