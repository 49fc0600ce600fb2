#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debias/dataset.hpp"
#include "debias/losses.hpp"
#include "debias/model.hpp"

namespace debias {

enum class TrainMode { baseline, unlearn };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
  TrainMode mode = TrainMode::baseline;
  HyperParams hp;
  Architecture arch = Architecture::default_arch();
  bool augment = true;

  void validate() const;
  std::string canonical_json() const;
  std::string config_hash() const;  // fnv1a hex of canonical_json
};

struct EpochStats {
  double ce = 0.0;
  double triplet = 0.0;
  double total = 0.0;
  double val_accuracy = 0.0;
};

struct TrainRun {
  TrainConfig config;
  std::vector<EpochStats> history;
  int steps_per_epoch = 0;
  int best_epoch = 0;  // 0-based index into history
  Checkpoint best_checkpoint;
  Checkpoint final_checkpoint;
};

// ceil rule: a short final batch still counts as a step
constexpr int steps_per_epoch_for(int n_train, int batch_size) {
  return (n_train + batch_size - 1) / batch_size;
}

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Per step: one shuffled classification batch feeds CE; in unlearn mode a
// triplet batch (object anchors, seafloor negatives) additionally feeds
// the margin term through the shared encoder, and one Adam step applies
// to ce + lambda * triplet. Classification batching and augmentation draw
// from streams independent of the triplet streams, so a baseline run and
// an unlearn run with the same seed see identical CE batches.
TrainRun train(const Dataset& ds, const TrainConfig& cfg,
               const Checkpoint* init = nullptr);

struct SanityCheck {
  std::string name;
  bool passed;
  std::string note;
};

struct SanityReport {
  bool ok = true;
  std::vector<SanityCheck> checks;
};

// Cheap pre-flight: batch shapes, label ranges, triplet label
// constraints, one finite forward/backward pass.
SanityReport sanity_checks(const Dataset& ds, const Model& model);

std::string history_json(const TrainRun& run);

// Adam with bias correction; state lives across steps.
class Adam {
 public:
  Adam(size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  std::vector<double> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace debias
