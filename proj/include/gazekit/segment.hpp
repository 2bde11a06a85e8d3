#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

#include "gazekit/image.hpp"
#include "gazekit/locate.hpp"

namespace gazekit {

// Binary occupancy raster, dimensions matching a source frame. Masks grown
// with grow_region are 4-connected and contain their seed; externally
// produced masks are accepted as-is (nonempty, matching dimensions).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidSize("mask dimensions must be positive");
    bits_.assign(static_cast<std::size_t>(width) * height, 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool test(int x, int y) const { return bits_[idx(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits_[idx(x, y)] = v ? 1 : 0; }
  std::size_t count() const;
  bool operator==(const Mask&) const = default;

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct RegionGrowConfig {
  double tau = 32.0;  // Euclidean RGB distance to the seed pixel
  std::size_t max_pixels = std::numeric_limits<std::size_t>::max();
};

// Breadth-first 4-connected flood fill from the seed, admitting pixels whose
// color lies within tau of the seed pixel's color, capped at max_pixels.
// Neighbor order up, down, left, right; the cap cut is deterministic.
Mask grow_region(const Image& img, PixelPoint seed, const RegionGrowConfig& cfg);

// PBM (P4) masks: packed rows, MSB first, 1 = inside the mask.
Mask read_pbm(std::istream& in);
void write_pbm(std::ostream& out, const Mask& mask);
Mask load_mask_pbm(const std::filesystem::path& path);
void save_mask_pbm(const std::filesystem::path& path, const Mask& mask);

// Loads `<root>/<video_id>/<frame_index>.pbm` and checks dimensions.
Mask load_external_mask(const std::filesystem::path& path, int expected_width, int expected_height);

struct MaskBBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bounds
};
MaskBBox mask_bbox(const Mask& mask);  // InvalidInput when the mask is empty

// Background zeroed, cropped to the tight bounding box of the mask.
Image render_masked_raw(const Image& img, const Mask& mask);
// render_masked_raw followed by bilinear resize to resize_to.
Image render_masked(const Image& img, const Mask& mask, int resize_to = 224);

// Point-prompted mask source. The pipeline is agnostic to how masks are
// produced; the baseline grows a region from the prompt, the external
// provider replays masks precomputed by a segmentation model.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual Mask mask_for(const Image& frame, std::int64_t frame_index, PixelPoint seed) const = 0;
};

class RegionGrowProvider : public MaskProvider {
 public:
  explicit RegionGrowProvider(RegionGrowConfig cfg) : cfg_(cfg) {}
  Mask mask_for(const Image& frame, std::int64_t frame_index, PixelPoint seed) const override;

 private:
  RegionGrowConfig cfg_;
};

class ExternalMaskProvider : public MaskProvider {
 public:
  ExternalMaskProvider(std::filesystem::path root, std::string video_id)
      : root_(std::move(root)), video_id_(std::move(video_id)) {}
  Mask mask_for(const Image& frame, std::int64_t frame_index, PixelPoint seed) const override;

 private:
  std::filesystem::path root_;
  std::string video_id_;
};

}  // namespace gazekit
