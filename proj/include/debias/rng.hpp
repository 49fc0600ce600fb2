#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace debias {

// Derive independent sub-seeds from a base seed. Streams tagged with
// different strings (or index tuples) never collide in practice, so each
// consumer of randomness (init, shuffle, augment, ...) gets its own Rng
// and draw counts in one stream do not shift another.
uint64_t mix_seed(uint64_t seed, std::string_view tag);
uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0);

// Deterministic random source. Distributions are hand-rolled on top of
// mt19937_64 because the standard pins the engine's output but not the
// library distributions; this keeps byte-level reproducibility under our
// control.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). bound must be >= 1.
  uint64_t uniform_int(uint64_t bound);

  // Standard normal via Box-Muller; caches the spare draw.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over a byte range; used for seed mixing and config hashing.
uint64_t fnv1a(const void* data, size_t len, uint64_t state = 0xcbf29ce484222325ull);

}  // namespace debias
