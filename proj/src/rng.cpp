#include "debias/rng.hpp"

#include <cmath>

namespace debias {

uint64_t fnv1a(const void* data, size_t len, uint64_t state) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ull;
  }
  return state;
}

namespace {

// splitmix64 finalizer; decorrelates related inputs.
uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
  uint64_t h = fnv1a(tag.data(), tag.size());
  return mix64(seed ^ mix64(h));
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
  return mix64(seed ^ mix64(a ^ mix64(b)));
}

uint64_t Rng::uniform_int(uint64_t bound) {
  // Rejection sampling to avoid modulo bias.
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace debias
