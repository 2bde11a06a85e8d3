#include "gazekit/segment.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "gazekit/errors.hpp"
#include "gazekit/locate.hpp"

namespace gazekit {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask grow_region(const Image& img, PixelPoint seed, const RegionGrowConfig& cfg) {
  if (!img.contains(seed.x, seed.y)) throw InvalidInput("seed outside image");
  if (cfg.tau < 0.0) throw InvalidInput("tau must be non-negative");
  if (cfg.max_pixels < 1) throw InvalidInput("max_pixels must be at least 1");

  const Rgb seed_color = img.at(seed.x, seed.y);
  const double tau2 = cfg.tau * cfg.tau;
  auto admissible = [&](int x, int y) {
    Rgb c = img.at(x, y);
    double dr = static_cast<double>(c.r) - seed_color.r;
    double dg = static_cast<double>(c.g) - seed_color.g;
    double db = static_cast<double>(c.b) - seed_color.b;
    return dr * dr + dg * dg + db * db <= tau2;
  };

  Mask mask(img.width(), img.height());
  std::deque<PixelPoint> queue;
  mask.set(seed.x, seed.y);
  queue.push_back(seed);
  std::size_t admitted = 1;

  while (!queue.empty() && admitted < cfg.max_pixels) {
    PixelPoint p = queue.front();
    queue.pop_front();
    const PixelPoint neighbors[4] = {{p.x, p.y - 1}, {p.x, p.y + 1}, {p.x - 1, p.y}, {p.x + 1, p.y}};
    for (const auto& n : neighbors) {
      if (!img.contains(n.x, n.y) || mask.test(n.x, n.y)) continue;
      if (!admissible(n.x, n.y)) continue;
      mask.set(n.x, n.y);
      queue.push_back(n);
      if (++admitted >= cfg.max_pixels) break;
    }
  }
  return mask;
}

namespace {

int next_pbm_int(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw FormatError("malformed PBM header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1'000'000'000L) throw FormatError("PBM dimension out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(v);
}

}  // namespace

Mask read_pbm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '4') throw FormatError("not a P4 PBM stream");
  int w = next_pbm_int(in);
  int h = next_pbm_int(in);
  in.get();  // single whitespace before raster
  if (w <= 0 || h <= 0) throw FormatError("non-positive PBM dimensions");

  Mask mask(w, h);
  const int row_bytes = (w + 7) / 8;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(row_bytes));
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row_bytes);
    if (in.gcount() != row_bytes) throw FormatError("truncated PBM raster");
    for (int x = 0; x < w; ++x)
      if (row[x / 8] & (0x80u >> (x % 8))) mask.set(x, y);
  }
  return mask;
}

void write_pbm(std::ostream& out, const Mask& mask) {
  out << "P4\n" << mask.width() << ' ' << mask.height() << '\n';
  const int row_bytes = (mask.width() + 7) / 8;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(row_bytes));
  for (int y = 0; y < mask.height(); ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width(); ++x)
      if (mask.test(x, y)) row[x / 8] |= 0x80u >> (x % 8);
    out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
}

Mask load_mask_pbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mask file: " + path.string());
  return read_pbm(in);
}

void save_mask_pbm(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create mask file: " + path.string());
  write_pbm(out, mask);
  if (!out) throw IoError("failed writing mask file: " + path.string());
}

Mask load_external_mask(const std::filesystem::path& path, int expected_width, int expected_height) {
  Mask mask = load_mask_pbm(path);
  if (mask.width() != expected_width || mask.height() != expected_height)
    throw ShapeError("mask dimensions do not match frame: " + path.string());
  if (mask.count() == 0) throw FormatError("mask has no set bits: " + path.string());
  return mask;
}

MaskBBox mask_bbox(const Mask& mask) {
  MaskBBox box{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.test(x, y)) {
        box.x0 = std::min(box.x0, x);
        box.y0 = std::min(box.y0, y);
        box.x1 = std::max(box.x1, x);
        box.y1 = std::max(box.y1, y);
      }
  if (box.x1 < 0) throw InvalidInput("mask has no set bits");
  return box;
}

Image render_masked_raw(const Image& img, const Mask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height())
    throw ShapeError("mask dimensions do not match image");
  MaskBBox box = mask_bbox(mask);
  Image out(box.x1 - box.x0 + 1, box.y1 - box.y0 + 1);
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x)
      if (mask.test(x, y)) out.set(x - box.x0, y - box.y0, img.at(x, y));
  return out;
}

Image render_masked(const Image& img, const Mask& mask, int resize_to) {
  return resize_bilinear(render_masked_raw(img, mask), resize_to);
}

Mask RegionGrowProvider::mask_for(const Image& frame, std::int64_t, PixelPoint seed) const {
  return grow_region(frame, seed, cfg_);
}

Mask ExternalMaskProvider::mask_for(const Image& frame, std::int64_t frame_index, PixelPoint) const {
  auto path = root_ / video_id_ / (std::to_string(frame_index) + ".pbm");
  return load_external_mask(path, frame.width(), frame.height());
}

}  // namespace gazekit
