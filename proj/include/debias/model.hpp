#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "debias/dataset.hpp"
#include "debias/image.hpp"
#include "debias/rng.hpp"

namespace debias {

// Conv stack description: stride-2 3x3 blocks with ReLU, then global
// average pooling and a linear projection to the embedding. The string id
// is embedded in checkpoints and must match on load-into-pipeline.
struct Architecture {
  int input_size = kImageSize;
  std::vector<int> channels = {4, 8, 16, 32};
  int embed_dim = 128;
  int n_classes = kNumClasses;

  std::string id() const;
  static Architecture parse(const std::string& id);
  static Architecture default_arch() { return {}; }
  // Small encoder for gradient checks and fast unit tests.
  static Architecture toy() { return {32, {2, 4}, 8, kNumClasses}; }

  void validate() const;
  std::vector<int> spatial_sizes() const;  // per-block output extents
};

class Model {
 public:
  Model(Architecture arch, Normalization norm);

  void init_params(Rng& rng);

  size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  const Architecture& arch() const { return arch_; }
  const Normalization& norm() const { return norm_; }

  // Forward-pass cache; needed by backward().
  struct Activations {
    int batch = 0;
    std::vector<double> input_std;            // standardized input
    std::vector<std::vector<double>> conv_pre;   // pre-ReLU per block
    std::vector<std::vector<double>> conv_post;  // post-ReLU per block
    std::vector<double> gap;
    std::vector<double> embed;
    std::vector<double> logits;
  };

  // images01: batch x S x S grayscale in [0,1], row-major. Standardization
  // happens inside so callers never touch the frozen dataset stats.
  void forward(const std::vector<double>& images01, int batch, Activations& acts,
               bool with_logits) const;

  // Accumulates parameter gradients into grad (size param_count()).
  // dlogits and/or dembed_extra may be null; both present means the
  // embedding gradient is the head backward plus the extra term.
  void backward(const Activations& acts, const std::vector<double>* dlogits,
                const std::vector<double>* dembed_extra, std::vector<double>& grad) const;

  std::vector<double> embed_batch(const std::vector<double>& images01, int batch) const;
  std::vector<double> logits_batch(const std::vector<double>& images01, int batch) const;
  std::vector<double> head_logits(const std::vector<double>& embed, int batch) const;
  std::vector<int> predict_batch(const std::vector<double>& images01, int batch) const;

  static int argmax_class(const double* logits, int n_classes);

 private:
  Architecture arch_;
  Normalization norm_;
  std::vector<double> params_;

  struct Segment {
    size_t w_off, w_len, b_off, b_len;
  };
  std::vector<Segment> conv_;  // per block
  Segment embed_fc_;
  Segment head_fc_;

  void layout();
};

// ---- checkpoints -----------------------------------------------------------

struct Checkpoint {
  int format_version = 1;
  std::string architecture_id;
  int embed_dim = 0;
  int n_classes = 0;
  Normalization norm;
  std::string config_hash;
  std::vector<double> params;
};

Checkpoint make_checkpoint(const Model& model, const std::string& config_hash);
Model model_from_checkpoint(const Checkpoint& ckpt);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace debias
