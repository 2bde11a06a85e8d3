#include "gazekit/locate.hpp"

#include <algorithm>
#include <cmath>

#include "gazekit/errors.hpp"

namespace gazekit {

PixelPoint find_gaze_dot(const Image& img) {
  const std::uint8_t* p = img.data().data();
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  int best = -1531;  // below the score floor of -510*3
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < n; ++i, p += 3) {
    int s = 2 * p[1] - p[0] - p[2];
    if (s > best) {
      best = s;
      best_idx = i;
    }
  }
  return PixelPoint{static_cast<int>(best_idx % img.width()),
                    static_cast<int>(best_idx / img.width())};
}

Image crop_square(const Image& img, PixelPoint center, const CropSpec& spec) {
  if (spec.size < 2) throw InvalidSize("crop size must be at least 2");
  if (!img.contains(center.x, center.y)) throw InvalidInput("crop center outside image");
  if (spec.size > std::min(img.width(), img.height()))
    throw CropTooLarge("crop size exceeds frame dimensions");

  int x0 = std::clamp(center.x - spec.size / 2, 0, img.width() - spec.size);
  int y0 = std::clamp(center.y - spec.size / 2, 0, img.height() - spec.size);

  Image out(spec.size, spec.size);
  for (int y = 0; y < spec.size; ++y)
    for (int x = 0; x < spec.size; ++x) out.set(x, y, img.at(x0 + x, y0 + y));
  return out;
}

Image resize_bilinear(const Image& img, int side) {
  if (side <= 0) throw InvalidSize("resize side must be positive");
  if (img.empty()) throw InvalidInput("cannot resize an empty image");
  if (img.width() == side && img.height() == side) return img;

  Image out(side, side);
  const double sx = static_cast<double>(img.width()) / side;
  const double sy = static_cast<double>(img.height()) / side;
  for (int y = 0; y < side; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int ya = std::clamp(y0, 0, img.height() - 1);
    int yb = std::clamp(y0 + 1, 0, img.height() - 1);
    for (int x = 0; x < side; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int xa = std::clamp(x0, 0, img.width() - 1);
      int xb = std::clamp(x0 + 1, 0, img.width() - 1);

      Rgb p00 = img.at(xa, ya), p10 = img.at(xb, ya);
      Rgb p01 = img.at(xa, yb), p11 = img.at(xb, yb);
      auto lerp2 = [&](double a, double b, double c, double d) {
        double top = a + (b - a) * wx;
        double bot = c + (d - c) * wx;
        return top + (bot - top) * wy;
      };
      auto to_u8 = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      };
      out.set(x, y,
              Rgb{to_u8(lerp2(p00.r, p10.r, p01.r, p11.r)),
                  to_u8(lerp2(p00.g, p10.g, p01.g, p11.g)),
                  to_u8(lerp2(p00.b, p10.b, p01.b, p11.b))});
    }
  }
  return out;
}

}  // namespace gazekit
