#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gazekit/image.hpp"
#include "gazekit/ingest.hpp"
#include "gazekit/timeline.hpp"

namespace gazekit {

struct Rect {
  int x = 0, y = 0, width = 0, height = 0;
  bool intersects(const Rect& o) const {
    return x < o.x + o.width && o.x < x + width && y < o.y + o.height && o.y < y + height;
  }
};

struct GazeVisit {
  int class_index = 0;
  int frames = 1;
};

// Scripted desk-scale session: one colored rectangle per taxonomy class, a
// gaze path visiting them, and (optionally) a rendered gaze dot whose center
// pixel is pure green so the dot detector can recover it exactly.
struct SyntheticSessionSpec {
  int frame_count = 500;
  int width = 640;
  int height = 360;
  std::vector<Rect> regions;      // one per class; empty selects a grid layout
  std::vector<GazeVisit> path;    // cycled until frame_count; empty = round-robin
  bool render_dot = true;
  double noise_level = 0.0;       // uniform per-channel scene noise amplitude
  int gaze_margin = 4;            // fixations stay this far inside the region
  std::uint64_t seed = 0;
};

struct SyntheticSession {
  std::vector<Image> frames;
  std::vector<GazeRecord> gaze;
  LabeledTimeline truth;
  std::vector<Rect> regions;
  std::vector<Rgb> region_colors;
};

SyntheticSession generate_synthetic_session(const SyntheticSessionSpec& spec, const ClassTaxonomy& taxonomy);

// Writes frames/<index>.ppm, gaze.csv and truth.csv under dir.
void write_session_dir(const std::filesystem::path& dir, const SyntheticSession& session,
                       const ClassTaxonomy& taxonomy);

}  // namespace gazekit
