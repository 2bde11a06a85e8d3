#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <queue>
#include <sstream>

#include "gazekit/errors.hpp"
#include "gazekit/segment.hpp"
#include "gazekit/rng.hpp"
#include "test_util.hpp"

using namespace gazekit;

namespace {

// Independent flood fill: plain visited-set BFS with a std::queue, no cap.
Mask bfs_oracle(const Image& img, PixelPoint seed, double tau) {
  Mask mask(img.width(), img.height());
  Rgb sc = img.at(seed.x, seed.y);
  auto close = [&](int x, int y) {
    Rgb c = img.at(x, y);
    double d = std::sqrt(std::pow(c.r - sc.r, 2.0) + std::pow(c.g - sc.g, 2.0) + std::pow(c.b - sc.b, 2.0));
    return d <= tau;
  };
  std::queue<PixelPoint> q;
  q.push(seed);
  mask.set(seed.x, seed.y);
  while (!q.empty()) {
    auto p = q.front();
    q.pop();
    const int dx[] = {0, 0, -1, 1}, dy[] = {-1, 1, 0, 0};
    for (int i = 0; i < 4; ++i) {
      int x = p.x + dx[i], y = p.y + dy[i];
      if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
      if (mask.test(x, y) || !close(x, y)) continue;
      mask.set(x, y);
      q.push(PixelPoint{x, y});
    }
  }
  return mask;
}

Image two_region_image(Rng& rng) {
  Image img(32, 24, Rgb{20, 20, 20});
  // Left block near-dark, right block near-bright, with per-pixel jitter.
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) {
      int base = x < 16 ? 30 : 200;
      auto jitter = [&] { return static_cast<std::uint8_t>(base + static_cast<int>(rng.next_below(12))); };
      img.set(x, y, Rgb{jitter(), jitter(), jitter()});
    }
  return img;
}

}  // namespace

TEST_CASE("grow_region: uniform image with tau 0 fills the frame") {
  Image img(9, 7, Rgb{50, 60, 70});
  auto mask = grow_region(img, PixelPoint{4, 3}, RegionGrowConfig{0.0, SIZE_MAX});
  CHECK(mask.count() == 9u * 7u);
}

TEST_CASE("grow_region: hard boundary keeps exactly the square") {
  Image img(30, 30, Rgb{0, 0, 0});
  for (int y = 10; y < 20; ++y)
    for (int x = 10; x < 20; ++x) img.set(x, y, Rgb{255, 255, 255});
  auto mask = grow_region(img, PixelPoint{14, 15}, RegionGrowConfig{10.0, SIZE_MAX});
  CHECK(mask.count() == 100);
  for (int y = 10; y < 20; ++y)
    for (int x = 10; x < 20; ++x) CHECK(mask.test(x, y));
}

TEST_CASE("grow_region: matches independent BFS oracle on random two-region images") {
  Rng rng(41);
  for (int iter = 0; iter < 20; ++iter) {
    Image img = two_region_image(rng);
    PixelPoint seed{static_cast<int>(rng.next_below(32)), static_cast<int>(rng.next_below(24))};
    double tau = 20.0 + 30.0 * rng.next_double();
    auto mask = grow_region(img, seed, RegionGrowConfig{tau, SIZE_MAX});
    CHECK(mask == bfs_oracle(img, seed, tau));
  }
}

TEST_CASE("grow_region: seed containment and 4-connectivity") {
  Rng rng(42);
  for (int iter = 0; iter < 10; ++iter) {
    Image img = two_region_image(rng);
    PixelPoint seed{static_cast<int>(rng.next_below(32)), static_cast<int>(rng.next_below(24))};
    auto mask = grow_region(img, seed, RegionGrowConfig{25.0, 1 + rng.next_below(200)});
    CHECK(mask.test(seed.x, seed.y));
    // Every set pixel must reach the seed through set pixels.
    Mask reach(mask.width(), mask.height());
    std::queue<PixelPoint> q;
    q.push(seed);
    reach.set(seed.x, seed.y);
    while (!q.empty()) {
      auto p = q.front();
      q.pop();
      const int dx[] = {0, 0, -1, 1}, dy[] = {-1, 1, 0, 0};
      for (int i = 0; i < 4; ++i) {
        int x = p.x + dx[i], y = p.y + dy[i];
        if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) continue;
        if (!mask.test(x, y) || reach.test(x, y)) continue;
        reach.set(x, y);
        q.push(PixelPoint{x, y});
      }
    }
    CHECK(reach == mask);
  }
}

TEST_CASE("grow_region: tau monotonicity") {
  Rng rng(43);
  for (int iter = 0; iter < 10; ++iter) {
    Image img = two_region_image(rng);
    PixelPoint seed{static_cast<int>(rng.next_below(32)), static_cast<int>(rng.next_below(24))};
    double tau1 = 40.0 * rng.next_double();
    double tau2 = tau1 + 40.0 * rng.next_double();
    auto m1 = grow_region(img, seed, RegionGrowConfig{tau1, SIZE_MAX});
    auto m2 = grow_region(img, seed, RegionGrowConfig{tau2, SIZE_MAX});
    for (int y = 0; y < m1.height(); ++y)
      for (int x = 0; x < m1.width(); ++x)
        if (m1.test(x, y)) CHECK(m2.test(x, y));
  }
}

TEST_CASE("grow_region: pixel cap is respected") {
  Image img(20, 20, Rgb{5, 5, 5});
  auto mask = grow_region(img, PixelPoint{10, 10}, RegionGrowConfig{0.0, 37});
  CHECK(mask.count() == 37);
}

TEST_CASE("pbm: full mask round-trips and dimension checks") {
  Mask full(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) full.set(x, y);
  std::stringstream s;
  write_pbm(s, full);
  CHECK(read_pbm(s) == full);

  auto dir = std::filesystem::temp_directory_path() / "gazekit_pbm_test";
  std::filesystem::create_directories(dir);
  save_mask_pbm(dir / "m.pbm", full);
  CHECK(load_external_mask(dir / "m.pbm", 4, 4) == full);
  CHECK_THROWS_AS(load_external_mask(dir / "m.pbm", 8, 8), ShapeError);
  CHECK_THROWS_AS(load_external_mask(dir / "absent.pbm", 4, 4), IoError);

  Mask empty(4, 4);
  save_mask_pbm(dir / "empty.pbm", empty);
  CHECK_THROWS_AS(load_external_mask(dir / "empty.pbm", 4, 4), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pbm: random masks round-trip, including non-multiple-of-8 widths") {
  Rng rng(44);
  for (int iter = 0; iter < 15; ++iter) {
    int w = 1 + static_cast<int>(rng.next_below(21));
    int h = 1 + static_cast<int>(rng.next_below(13));
    Mask mask(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (rng.next_double() < 0.4) mask.set(x, y);
    std::stringstream s;
    write_pbm(s, mask);
    CHECK(read_pbm(s) == mask);
  }
}

TEST_CASE("render_masked: full mask keeps the whole image") {
  Rng rng(45);
  Image img = testutil::random_image(12, 12, rng);
  Mask full(12, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) full.set(x, y);
  CHECK(render_masked_raw(img, full) == img);
  CHECK(render_masked(img, full, 12) == img);
}

TEST_CASE("render_masked: single pixel mask") {
  Image img(8, 8, Rgb{0, 0, 0});
  img.set(3, 3, Rgb{200, 100, 50});
  Mask mask(8, 8);
  mask.set(3, 3);
  auto raw = render_masked_raw(img, mask);
  CHECK(raw.width() == 1);
  CHECK(raw.height() == 1);
  CHECK(raw.at(0, 0) == Rgb{200, 100, 50});
  auto resized = render_masked(img, mask, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) CHECK(resized.at(x, y) == Rgb{200, 100, 50});
}

TEST_CASE("render_masked: matches the two-step crop+zero oracle") {
  Rng rng(46);
  Image img = testutil::random_image(24, 18, rng);
  Mask mask(24, 18);
  for (int y = 5; y < 12; ++y)
    for (int x = 8; x < 17; ++x) mask.set(x, y);

  // Oracle: zero background over the full frame, then crop the bbox.
  Image zeroed(24, 18, Rgb{0, 0, 0});
  for (int y = 5; y < 12; ++y)
    for (int x = 8; x < 17; ++x) zeroed.set(x, y, img.at(x, y));
  Image expected(9, 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) expected.set(x, y, zeroed.at(8 + x, 5 + y));

  CHECK(render_masked_raw(img, mask) == expected);
}

TEST_CASE("render_masked: nothing outside the mask survives (pre-resize)") {
  Rng rng(47);
  for (int iter = 0; iter < 10; ++iter) {
    Image img(16, 16, Rgb{255, 255, 255});
    Mask mask(16, 16);
    for (int pts = 0; pts < 25; ++pts)
      mask.set(static_cast<int>(rng.next_below(16)), static_cast<int>(rng.next_below(16)));
    auto box_raw = render_masked_raw(img, mask);
    auto box = mask_bbox(mask);
    for (int y = 0; y < box_raw.height(); ++y)
      for (int x = 0; x < box_raw.width(); ++x) {
        if (!mask.test(box.x0 + x, box.y0 + y))
          CHECK(box_raw.at(x, y) == Rgb{0, 0, 0});
      }
  }
}

TEST_CASE("render_masked: dimension mismatch") {
  Image img(8, 8);
  Mask mask(4, 4);
  mask.set(0, 0);
  CHECK_THROWS_AS(render_masked_raw(img, mask), ShapeError);
}

TEST_CASE("mask providers share the point-prompt contract") {
  Image frame(20, 20, Rgb{100, 100, 100});
  RegionGrowProvider grow(RegionGrowConfig{1.0, SIZE_MAX});
  auto mask = grow.mask_for(frame, 0, PixelPoint{3, 3});
  CHECK(mask.count() == 400);

  auto dir = std::filesystem::temp_directory_path() / "gazekit_provider_test";
  std::filesystem::create_directories(dir / "vid");
  save_mask_pbm(dir / "vid" / "5.pbm", mask);
  ExternalMaskProvider ext(dir, "vid");
  CHECK(ext.mask_for(frame, 5, PixelPoint{0, 0}) == mask);
  CHECK_THROWS_AS(ext.mask_for(frame, 6, PixelPoint{0, 0}), IoError);
  std::filesystem::remove_all(dir);
}
