#pragma once

#include <cstdint>
#include <vector>

#include "gazekit/errors.hpp"

namespace gazekit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

// Row-major 8-bit RGB raster. Value type; copies are deep.
class Image {
 public:
  Image() = default;

  Image(int width, int height, Rgb fill = Rgb{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidSize("image dimensions must be positive");
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = fill.r;
      pixels_[i + 1] = fill.g;
      pixels_[i + 2] = fill.b;
    }
  }

  static Image from_pixels(int width, int height, std::vector<std::uint8_t> pixels) {
    if (width <= 0 || height <= 0) throw InvalidSize("image dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
      throw ShapeError("pixel buffer length must be width*height*3");
    Image img;
    img.width_ = width;
    img.height_ = height;
    img.pixels_ = std::move(pixels);
    return img;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  Rgb at(int x, int y) const {
    const std::uint8_t* p = pixels_.data() + offset(x, y);
    return Rgb{p[0], p[1], p[2]};
  }

  void set(int x, int y, Rgb c) {
    std::uint8_t* p = pixels_.data() + offset(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  const std::vector<std::uint8_t>& data() const { return pixels_; }
  std::vector<std::uint8_t>& data() { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace gazekit
