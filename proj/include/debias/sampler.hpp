#pragma once

#include <stdexcept>
#include <vector>

#include "debias/dataset.hpp"
#include "debias/rng.hpp"

namespace debias {

struct NoPositiveAvailable : std::runtime_error {
  explicit NoPositiveAvailable(const std::string& what) : std::runtime_error(what) {}
};
struct NoNegativeAvailable : std::runtime_error {
  explicit NoNegativeAvailable(const std::string& what) : std::runtime_error(what) {}
};

// Indices into the dataset's sample vector.
struct Triplet {
  int anchor;
  int positive;
  int negative;
};

struct TripletBatch {
  std::vector<Triplet> triplets;
};

// Anchor/positive from the same object class, negative always seafloor.
// Seafloor samples never anchor: with anchor and negative drawn from the
// same class the margin term degenerates, so the background class
// contributes through the classification stream only.
class TripletSampler {
 public:
  TripletSampler(const std::vector<ImageSample>& samples,
                 std::vector<int> train_indices);

  // Positive uniform over same-class training samples excluding the
  // anchor; negative uniform over seafloor training samples.
  Triplet sample_triplet(int anchor_index, Rng& rng) const;

  // One epoch: every object-class training sample anchors exactly once,
  // in shuffled order, grouped into batches (last may be short).
  std::vector<TripletBatch> epoch(int batch_size, Rng& rng) const;

  const std::vector<int>& object_indices() const { return object_indices_; }
  const std::vector<int>& seafloor_indices() const { return seafloor_indices_; }

 private:
  const std::vector<ImageSample>& samples_;
  std::vector<int> object_indices_;
  std::vector<int> seafloor_indices_;
  std::vector<std::vector<int>> by_class_;
};

}  // namespace debias
