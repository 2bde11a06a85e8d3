#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gazekit/errors.hpp"
#include "gazekit/locate.hpp"
#include "gazekit/rng.hpp"
#include "test_util.hpp"

using namespace gazekit;

namespace {

// Independent brute-force argmax of 2G - R - B, first in row-major order.
PixelPoint scan_oracle(const Image& img) {
  int best = -100000;
  PixelPoint where{0, 0};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      Rgb c = img.at(x, y);
      int s = 2 * c.g - c.r - c.b;
      if (s > best) {
        best = s;
        where = PixelPoint{x, y};
      }
    }
  return where;
}

}  // namespace

TEST_CASE("find_gaze_dot: unique green pixel") {
  Image img(16, 16, Rgb{0, 0, 0});
  img.set(7, 5, Rgb{0, 255, 0});
  CHECK(find_gaze_dot(img) == PixelPoint{7, 5});
}

TEST_CASE("find_gaze_dot: tie broken by row-major order") {
  Image img(10, 10, Rgb{0, 0, 0});
  img.set(0, 1, Rgb{0, 255, 0});  // row-major index 10
  img.set(0, 9, Rgb{0, 255, 0});  // row-major index 90
  CHECK(find_gaze_dot(img) == PixelPoint{0, 1});
}

TEST_CASE("find_gaze_dot: white is not green") {
  Image img(8, 8, Rgb{255, 255, 255});
  img.set(3, 4, Rgb{40, 200, 40});
  CHECK(find_gaze_dot(img) == PixelPoint{3, 4});
}

TEST_CASE("find_gaze_dot: matches brute-force oracle on random frames") {
  Rng rng(31);
  for (int iter = 0; iter < 25; ++iter) {
    Image img = testutil::random_image(64, 64, rng);
    CHECK(find_gaze_dot(img) == scan_oracle(img));
  }
}

TEST_CASE("find_gaze_dot: translation consistency") {
  Rng rng(32);
  Image base(48, 40, Rgb{10, 10, 10});
  for (int iter = 0; iter < 20; ++iter) {
    int x = static_cast<int>(rng.next_below(48));
    int y = static_cast<int>(rng.next_below(40));
    Image img = base;
    img.set(x, y, Rgb{0, 255, 0});
    CHECK(find_gaze_dot(img) == PixelPoint{x, y});
  }
}

TEST_CASE("crop_square: interior window arithmetic") {
  Image img(1920, 1080, Rgb{1, 2, 3});
  // Tag the expected window corners.
  img.set(896, 476, Rgb{9, 9, 9});
  img.set(1023, 603, Rgb{8, 8, 8});
  auto crop = crop_square(img, PixelPoint{960, 540}, CropSpec{128, 224});
  CHECK(crop.width() == 128);
  CHECK(crop.height() == 128);
  CHECK(crop.at(0, 0) == Rgb{9, 9, 9});
  CHECK(crop.at(127, 127) == Rgb{8, 8, 8});
}

TEST_CASE("crop_square: corner clamped by shifting") {
  Image img(1920, 1080, Rgb{0, 0, 0});
  img.set(0, 0, Rgb{9, 9, 9});
  img.set(127, 127, Rgb{8, 8, 8});
  auto crop = crop_square(img, PixelPoint{0, 0}, CropSpec{128, 224});
  CHECK(crop.width() == 128);
  CHECK(crop.at(0, 0) == Rgb{9, 9, 9});
  CHECK(crop.at(127, 127) == Rgb{8, 8, 8});
}

TEST_CASE("crop_square: oversized crop") {
  Image img(1920, 1080);
  CHECK_THROWS_AS(crop_square(img, PixelPoint{960, 540}, CropSpec{2048, 224}), CropTooLarge);
}

TEST_CASE("crop_square: center pixel lands at size/2 for interior centers") {
  Rng rng(33);
  Image img = testutil::random_image(100, 100, rng);
  for (int iter = 0; iter < 15; ++iter) {
    int size = 2 + 2 * static_cast<int>(rng.next_below(20));
    int cx = size / 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(100 - size + 1)));
    int cy = size / 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(100 - size + 1)));
    if (cx - size / 2 + size > 100 || cy - size / 2 + size > 100) continue;
    auto crop = crop_square(img, PixelPoint{cx, cy}, CropSpec{size, 224});
    CHECK(crop.width() == size);
    CHECK(crop.at(size / 2, size / 2) == img.at(cx, cy));
  }
}

TEST_CASE("resize_bilinear: constants stay constant") {
  Image img(13, 13, Rgb{12, 200, 99});
  for (int side : {1, 3, 13, 40}) {
    auto out = resize_bilinear(img, side);
    CHECK(out.width() == side);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) CHECK(out.at(x, y) == Rgb{12, 200, 99});
  }
}

TEST_CASE("resize_bilinear: 2x2 checkerboard to 1x1 averages all four") {
  Image img(2, 2);
  img.set(0, 0, Rgb{255, 0, 0});
  img.set(1, 0, Rgb{0, 0, 0});
  img.set(0, 1, Rgb{0, 0, 0});
  img.set(1, 1, Rgb{255, 0, 0});
  auto out = resize_bilinear(img, 1);
  CHECK(out.at(0, 0) == Rgb{128, 0, 0});  // 127.5 rounds half away from zero
}

TEST_CASE("resize_bilinear: matches per-pixel formula oracle on 4x4 -> 8x8") {
  Rng rng(34);
  Image img = testutil::random_image(4, 4, rng);
  auto out = resize_bilinear(img, 8);

  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double fx = (x + 0.5) * 0.5 - 0.5;
      double fy = (y + 0.5) * 0.5 - 0.5;
      int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
      double wx = fx - x0, wy = fy - y0;
      auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
      int xa = clampi(x0, 3), xb = clampi(x0 + 1, 3);
      int ya = clampi(y0, 3), yb = clampi(y0 + 1, 3);
      auto channel = [&](auto get) {
        double top = get(img.at(xa, ya)) * (1 - wx) + get(img.at(xb, ya)) * wx;
        double bot = get(img.at(xa, yb)) * (1 - wx) + get(img.at(xb, yb)) * wx;
        double v = top * (1 - wy) + bot * wy;
        return static_cast<std::uint8_t>(std::lround(v));
      };
      Rgb expected{channel([](Rgb c) { return static_cast<double>(c.r); }),
                   channel([](Rgb c) { return static_cast<double>(c.g); }),
                   channel([](Rgb c) { return static_cast<double>(c.b); })};
      CHECK(out.at(x, y) == expected);
    }
}

TEST_CASE("resize_bilinear: zero side") {
  Image img(4, 4);
  CHECK_THROWS_AS(resize_bilinear(img, 0), InvalidSize);
}
