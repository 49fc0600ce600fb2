#include "debias/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace debias {

int class_id_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return i;
  }
  throw std::invalid_argument("unknown class name: " + std::string(name));
}

size_t Mask::count() const {
  return static_cast<size_t>(std::count(on.begin(), on.end(), uint8_t{1}));
}

Image to_image(const ImageU8& u8) {
  Image img(u8.height, u8.width);
  for (size_t i = 0; i < u8.pixels.size(); ++i) img.pixels[i] = u8.pixels[i] / 255.0;
  return img;
}

ImageU8 quantize(const Image& img) {
  ImageU8 out(img.height, img.width);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    double v = std::clamp(img.pixels[i], 0.0, 1.0);
    out.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  if (src.height <= 0 || src.width <= 0) {
    throw std::invalid_argument("resize_bilinear: empty source image");
  }
  Image dst(out_h, out_w);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      const double top = src.at(y0, x0) * (1.0 - wx) + src.at(y0, x1) * wx;
      const double bot = src.at(y1, x0) * (1.0 - wx) + src.at(y1, x1) * wx;
      dst.at(y, x) = top * (1.0 - wy) + bot * wy;
    }
  }
  return dst;
}

double mean_intensity(const Image& img) {
  if (img.pixels.empty()) return 0.0;
  double acc = std::accumulate(img.pixels.begin(), img.pixels.end(), 0.0);
  return acc / static_cast<double>(img.pixels.size());
}

}  // namespace debias
