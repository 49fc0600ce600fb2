#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace debias {

constexpr int kNumClasses = 5;

// Fixed class order (alphabetical); matrices and reports index by it.
constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "human", "mine", "plane", "seafloor", "ship"};

constexpr int kSeafloorClass = 3;

int class_id_from_name(std::string_view name);

// Grayscale image, row-major doubles in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return pixels.size(); }
};

// Quantized grayscale image as stored on disk (8-bit PNG).
struct ImageU8 {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;

  ImageU8() = default;
  ImageU8(int h, int w, uint8_t fill = 0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

  uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// Binary mask; entries are 0 or 1.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> on;

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), on(static_cast<size_t>(h) * w, 0) {}

  uint8_t& at(int y, int x) { return on[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return on[static_cast<size_t>(y) * width + x]; }
  size_t count() const;
};

Image to_image(const ImageU8& u8);
ImageU8 quantize(const Image& img);

// Bilinear resample to out_h x out_w (half-pixel centers). A same-size
// resize reproduces the input exactly.
Image resize_bilinear(const Image& src, int out_h, int out_w);

double mean_intensity(const Image& img);

}  // namespace debias
