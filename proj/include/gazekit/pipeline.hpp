#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gazekit/classify.hpp"
#include "gazekit/probe.hpp"
#include "gazekit/segment.hpp"
#include "gazekit/synth.hpp"
#include "gazekit/timeline.hpp"

namespace gazekit {

// Ordered frame access; adapts directories of numbered images today and can
// front a video decoder later.
class FrameSequence {
 public:
  virtual ~FrameSequence() = default;
  virtual std::size_t size() const = 0;
  virtual std::int64_t frame_index(std::size_t pos) const = 0;
  virtual Image frame(std::size_t pos) const = 0;
};

class MemoryFrames : public FrameSequence {
 public:
  explicit MemoryFrames(std::vector<Image> frames) : frames_(std::move(frames)) {}
  std::size_t size() const override { return frames_.size(); }
  std::int64_t frame_index(std::size_t pos) const override { return static_cast<std::int64_t>(pos); }
  Image frame(std::size_t pos) const override { return frames_[pos]; }

 private:
  std::vector<Image> frames_;
};

// Scans a directory for `<number>.ppm` / `<number>.bmp`, ordered by number.
class DirectoryFrames : public FrameSequence {
 public:
  explicit DirectoryFrames(const std::filesystem::path& dir);
  std::size_t size() const override { return entries_.size(); }
  std::int64_t frame_index(std::size_t pos) const override { return entries_[pos].first; }
  Image frame(std::size_t pos) const override;

 private:
  std::vector<std::pair<std::int64_t, std::filesystem::path>> entries_;
};

struct Session {
  std::string session_id;
  std::shared_ptr<FrameSequence> frames;
  std::vector<GazeRecord> gaze;  // may be empty in detector mode
};

Session load_session_dir(const std::filesystem::path& dir, std::string session_id = "");

enum class SegmenterKind { region_grow, external };
enum class ClassifierKind { zero_shot, adapter, probe };
enum class GazeSource { log, detector };

using PipelineLog = std::function<void(const std::string& level, std::int64_t frame, const std::string& message)>;

struct PipelineConfig {
  std::string taxonomy_path;  // empty selects the default seven gaze targets
  int crop_size = 128;
  int resize_to = 224;
  bool use_mask = true;

  SegmenterKind segmenter = SegmenterKind::region_grow;
  double tau = 32.0;
  std::size_t max_pixels = 1u << 20;
  std::string masks_dir;

  ClassifierKind classifier = ClassifierKind::zero_shot;
  FusionMode fusion = FusionMode::mean_prob;
  double alpha = 1.0;
  double beta = 5.5;
  double temperature = 0.01;

  std::string crop_embeddings_path;   // external per-frame embeddings for crops
  std::string mask_embeddings_path;   // external per-frame embeddings for masked renders
  std::string class_embeddings_path;  // empty: seeded random anchors
  std::string cache_path;
  std::string mask_cache_path;  // empty: reuse cache_path
  std::string probe_path;
  std::string mask_probe_path;  // empty: reuse probe_path

  GazeSource gaze_source = GazeSource::log;
  std::uint64_t seed = 0;

  bool streaming = false;
  std::size_t queue_capacity = 64;  // clamped to 64
  bool paced = false;               // replay at the timeline's frame rate

  PipelineLog log;  // optional; receives per-frame skip/error events
};

// Models and providers resolved from a PipelineConfig. Tests and callers may
// assemble one directly instead of going through files.
struct PipelineComponents {
  ClassTaxonomy taxonomy = ClassTaxonomy::default_gaze_targets();
  std::shared_ptr<FeatureExtractor> crop_extractor;
  std::shared_ptr<FeatureExtractor> mask_extractor;
  ClassEmbeddings anchors;
  std::optional<FewShotCache> crop_cache;
  std::optional<FewShotCache> mask_cache;
  std::optional<LinearProbe> crop_probe;
  std::optional<LinearProbe> mask_probe;
  std::shared_ptr<MaskProvider> segmenter;
};

PipelineComponents load_components(const PipelineConfig& cfg, const std::string& video_id);

enum class FrameStatus { ok, invalid, failed };

struct FrameOutcome {
  std::int64_t frame_index = 0;
  FrameStatus status = FrameStatus::invalid;
  std::optional<int> label;
  std::optional<ClassScores> scores;
  std::string error;
};

struct PipelineResult {
  LabeledTimeline timeline;
  std::vector<FrameOutcome> outcomes;
  std::size_t produced = 0;
  std::size_t skipped = 0;  // invalid gaze plus per-frame failures
};

// Per frame: gaze point (logged estimate or dot detector) -> crop ->
// mask -> embed both inputs -> classify -> fuse -> top-1 label. Frames
// without a usable gaze estimate stay unlabeled; per-frame errors skip the
// frame and are logged. Throws PipelineError when more than half the frames
// produce no label.
PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineComponents& components,
                            const Session& session);
PipelineResult run_pipeline(const PipelineConfig& cfg, const Session& session);

// `frame,status,<one probability column per class>` rows.
void write_scores_csv(std::ostream& out, const PipelineResult& result, const ClassTaxonomy& taxonomy);

}  // namespace gazekit
