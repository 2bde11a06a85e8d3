#pragma once

#include "gazekit/image.hpp"

namespace gazekit {

struct PixelPoint {
  int x = 0;  // column
  int y = 0;  // row
  bool operator==(const PixelPoint&) const = default;
};

struct CropSpec {
  int size = 128;
  int resize_to = 224;
};

// Pixel maximizing the greenness score 2G - R - B; a saturated white region
// scores 0 there while the rendered overlay dot scores 510. Ties resolve to
// the smallest row-major index.
PixelPoint find_gaze_dot(const Image& img);

// size x size window [c - size/2, c - size/2 + size), shifted (not padded)
// to lie fully inside the frame. Throws CropTooLarge when the window cannot
// fit, InvalidSize for size < 2, InvalidInput when center is outside.
Image crop_square(const Image& img, PixelPoint center, const CropSpec& spec);

// Half-pixel-center bilinear resampling to a square side x side output.
Image resize_bilinear(const Image& img, int side);

}  // namespace gazekit
