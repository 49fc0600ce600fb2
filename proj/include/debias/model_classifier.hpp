#pragma once

#include "debias/explain.hpp"
#include "debias/losses.hpp"
#include "debias/model.hpp"

namespace debias {

// Lets the explainer drive a trained encoder+head like any other
// classifier. Batched inference goes through the conv kernels.
class ModelClassifier : public Classifier {
 public:
  explicit ModelClassifier(const Model& model) : model_(model) {}

  int n_classes() const override { return model_.arch().n_classes; }

  std::vector<double> predict_probs(const Image& img) const override {
    return predict_probs_batch({img})[0];
  }

  std::vector<std::vector<double>> predict_probs_batch(
      const std::vector<Image>& images) const override {
    const int S = model_.arch().input_size;
    const size_t img_len = static_cast<size_t>(S) * S;
    std::vector<double> batch(img_len * images.size());
    for (size_t i = 0; i < images.size(); ++i) {
      if (images[i].height != S || images[i].width != S) {
        throw std::invalid_argument("ModelClassifier: image size mismatch");
      }
      std::copy(images[i].pixels.begin(), images[i].pixels.end(),
                batch.begin() + i * img_len);
    }
    const auto logits = model_.logits_batch(batch, static_cast<int>(images.size()));
    const auto probs = softmax(logits, model_.arch().n_classes);
    std::vector<std::vector<double>> out(images.size());
    for (size_t i = 0; i < images.size(); ++i) {
      out[i].assign(probs.begin() + i * model_.arch().n_classes,
                    probs.begin() + (i + 1) * model_.arch().n_classes);
    }
    return out;
  }

 private:
  const Model& model_;
};

}  // namespace debias
