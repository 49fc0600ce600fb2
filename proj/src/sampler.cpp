#include "debias/sampler.hpp"

#include <algorithm>

namespace debias {

TripletSampler::TripletSampler(const std::vector<ImageSample>& samples,
                               std::vector<int> train_indices)
    : samples_(samples), by_class_(kNumClasses) {
  std::sort(train_indices.begin(), train_indices.end());
  for (int idx : train_indices) {
    const int label = samples_[idx].label;
    by_class_[label].push_back(idx);
    if (label == kSeafloorClass) {
      seafloor_indices_.push_back(idx);
    } else {
      object_indices_.push_back(idx);
    }
  }
}

Triplet TripletSampler::sample_triplet(int anchor_index, Rng& rng) const {
  const int label = samples_[anchor_index].label;
  if (label == kSeafloorClass) {
    throw std::invalid_argument("sample_triplet: seafloor samples cannot anchor");
  }
  const auto& peers = by_class_[label];
  if (peers.size() < 2) {
    throw NoPositiveAvailable("no positive available: class " +
                              std::string(kClassNames[label]) + " is a singleton");
  }
  if (seafloor_indices_.empty()) {
    throw NoNegativeAvailable("no negative available: train split has no seafloor samples");
  }
  // uniform over peers excluding the anchor
  int pos = anchor_index;
  const size_t k = rng.uniform_int(peers.size() - 1);
  size_t seen = 0;
  for (int idx : peers) {
    if (idx == anchor_index) continue;
    if (seen == k) {
      pos = idx;
      break;
    }
    ++seen;
  }
  const int neg = seafloor_indices_[rng.uniform_int(seafloor_indices_.size())];
  return {anchor_index, pos, neg};
}

std::vector<TripletBatch> TripletSampler::epoch(int batch_size, Rng& rng) const {
  if (batch_size < 1) throw std::invalid_argument("epoch: batch_size must be >= 1");
  std::vector<int> anchors = object_indices_;
  rng.shuffle(anchors);
  std::vector<TripletBatch> batches;
  TripletBatch cur;
  for (int a : anchors) {
    cur.triplets.push_back(sample_triplet(a, rng));
    if (static_cast<int>(cur.triplets.size()) == batch_size) {
      batches.push_back(std::move(cur));
      cur = {};
    }
  }
  if (!cur.triplets.empty()) batches.push_back(std::move(cur));
  return batches;
}

}  // namespace debias
