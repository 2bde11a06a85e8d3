#include "gazekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gazekit/errors.hpp"
#include "gazekit/image_io.hpp"
#include "gazekit/rng.hpp"

namespace gazekit {

namespace {

constexpr Rgb kBackground{60, 60, 60};
constexpr Rgb kDotCenter{0, 255, 0};
constexpr Rgb kDotRing{30, 220, 30};
constexpr int kDotRadius = 3;

// Muted palette; every color keeps the greenness score 2G-R-B well below
// the dot ring so the detector always lands on the rendered dot.
const Rgb kPalette[] = {
    {230, 190, 170}, {40, 70, 160},  {200, 200, 60}, {150, 150, 150},
    {120, 60, 150},  {220, 120, 40}, {90, 160, 120}, {170, 90, 90},
    {50, 120, 170},  {180, 140, 60}, {100, 100, 40}, {140, 40, 60},
};

std::vector<Rect> grid_layout(int num_classes, int width, int height) {
  int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_classes))));
  int rows = (num_classes + cols - 1) / cols;
  int cell_w = width / cols;
  int cell_h = height / rows;
  int margin_x = std::max(2, cell_w / 8);
  int margin_y = std::max(2, cell_h / 8);
  std::vector<Rect> regions;
  for (int k = 0; k < num_classes; ++k) {
    int cx = k % cols;
    int cy = k / cols;
    regions.push_back(Rect{cx * cell_w + margin_x, cy * cell_h + margin_y,
                           cell_w - 2 * margin_x, cell_h - 2 * margin_y});
  }
  return regions;
}

void draw_dot(Image& img, int cx, int cy) {
  for (int dy = -kDotRadius; dy <= kDotRadius; ++dy)
    for (int dx = -kDotRadius; dx <= kDotRadius; ++dx) {
      if (dx * dx + dy * dy > kDotRadius * kDotRadius) continue;
      int x = cx + dx, y = cy + dy;
      if (img.contains(x, y)) img.set(x, y, kDotRing);
    }
  img.set(cx, cy, kDotCenter);
}

}  // namespace

SyntheticSession generate_synthetic_session(const SyntheticSessionSpec& spec, const ClassTaxonomy& taxonomy) {
  const int K = taxonomy.size();
  if (spec.frame_count < 1) throw SpecError("frame_count must be positive");
  if (spec.width < 32 || spec.height < 32) throw SpecError("frame size too small");
  if (K > static_cast<int>(std::size(kPalette))) throw SpecError("palette smaller than taxonomy");

  // Fixations keep at least the dot radius inside the region; larger margins
  // model gaze settling on an object's interior.
  const int margin = std::max(spec.gaze_margin, kDotRadius + 1);

  std::vector<Rect> regions = spec.regions.empty() ? grid_layout(K, spec.width, spec.height) : spec.regions;
  if (static_cast<int>(regions.size()) != K) throw SpecError("need exactly one region per class");
  for (const auto& r : regions) {
    if (r.width < 2 * margin + 2 || r.height < 2 * margin + 2)
      throw SpecError("region too small for the gaze margin");
    if (r.x < 0 || r.y < 0 || r.x + r.width > spec.width || r.y + r.height > spec.height)
      throw SpecError("region outside the frame");
  }
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j)
      if (regions[i].intersects(regions[j])) throw SpecError("regions overlap");

  std::vector<GazeVisit> path = spec.path;
  if (path.empty())
    for (int k = 0; k < K; ++k) path.push_back(GazeVisit{k, 12});
  for (const auto& v : path) {
    if (v.class_index < 0 || v.class_index >= K) throw SpecError("path visits unknown class");
    if (v.frames < 1) throw SpecError("path dwell must be positive");
  }

  // Static scene shared by all frames; per-frame noise is layered on top.
  Image scene(spec.width, spec.height, kBackground);
  for (int k = 0; k < K; ++k) {
    const Rect& r = regions[static_cast<std::size_t>(k)];
    for (int y = r.y; y < r.y + r.height; ++y)
      for (int x = r.x; x < r.x + r.width; ++x) scene.set(x, y, kPalette[k]);
  }

  SyntheticSession session;
  session.regions = regions;
  for (int k = 0; k < K; ++k) session.region_colors.push_back(kPalette[k]);
  session.truth.session_id = "synthetic";
  session.truth.fps = 25.0;

  Rng gaze_rng(Rng::mix(spec.seed, 0x67617a65ULL));
  Rng noise_rng(Rng::mix(spec.seed, 0x6e6f697365ULL));
  const int noise_amp = static_cast<int>(std::lround(spec.noise_level));

  std::size_t visit = 0;
  int remaining = path[0].frames;
  for (int i = 0; i < spec.frame_count; ++i) {
    while (remaining == 0) {
      visit = (visit + 1) % path.size();
      remaining = path[visit].frames;
    }
    --remaining;
    const int cls = path[visit].class_index;
    const Rect& r = regions[static_cast<std::size_t>(cls)];

    int gx = static_cast<int>(gaze_rng.uniform_int(r.x + margin, r.x + r.width - margin - 1));
    int gy = static_cast<int>(gaze_rng.uniform_int(r.y + margin, r.y + r.height - margin - 1));

    Image frame = scene;
    if (noise_amp > 0) {
      auto& px = frame.data();
      for (auto& channel : px) {
        int v = static_cast<int>(channel) +
                static_cast<int>(noise_rng.uniform_int(-noise_amp, noise_amp));
        channel = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
    if (spec.render_dot) draw_dot(frame, gx, gy);

    session.frames.push_back(std::move(frame));
    session.gaze.push_back(GazeRecord{i, static_cast<std::int64_t>(i) * 40, gx, gy, true});
    session.truth.labels.push_back(cls);
  }
  return session;
}

void write_session_dir(const std::filesystem::path& dir, const SyntheticSession& session,
                       const ClassTaxonomy& taxonomy) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "frames", ec);
  if (ec) throw IoError("cannot create session directory: " + dir.string());

  for (std::size_t i = 0; i < session.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.ppm", i);
    save_image(dir / "frames" / name, session.frames[i]);
  }
  {
    std::ofstream out(dir / "gaze.csv");
    if (!out) throw IoError("cannot create gaze log");
    out << serialize_gaze_log(session.gaze);
  }
  {
    std::ofstream out(dir / "truth.csv");
    if (!out) throw IoError("cannot create truth timeline");
    write_timeline_csv(out, session.truth, taxonomy);
  }
}

}  // namespace gazekit
