#pragma once

#include <filesystem>
#include <iosfwd>

#include "gazekit/image.hpp"

namespace gazekit {

// Binary PPM (P6), maxval 255.
Image read_ppm(std::istream& in);
void write_ppm(std::ostream& out, const Image& img);

// Uncompressed 24-bit BMP (BITMAPINFOHEADER, bottom-up or top-down rows).
Image read_bmp(std::istream& in);
void write_bmp(std::ostream& out, const Image& img);

// Dispatch on extension: .ppm or .bmp.
Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& img);

}  // namespace gazekit
