#pragma once

#include <filesystem>
#include <vector>

#include "debias/image.hpp"

namespace debias {

// 8-bit grayscale PNG, no interlace. Deterministic output bytes for
// identical pixel data.
void write_png_gray(const std::filesystem::path& path, const ImageU8& img);
ImageU8 read_png_gray(const std::filesystem::path& path);

// 8-bit RGB PNG for overlays; rgb is packed row-major, 3 bytes per pixel.
void write_png_rgb(const std::filesystem::path& path, int height, int width,
                   const std::vector<uint8_t>& rgb);

}  // namespace debias
