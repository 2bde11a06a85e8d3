#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gazekit/image.hpp"

namespace gazekit {

// Per-frame gaze estimate as exported by the session recorder.
struct GazeRecord {
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;
  int x = 0;
  int y = 0;
  bool valid = false;
  bool operator==(const GazeRecord&) const = default;
};

// Gaze log CSV: header `frame,timestamp_ms,x,y,valid`, one record per row.
// frame_width/frame_height of 0 disable the upper bound check; coordinates of
// valid records must still be non-negative. Throws FormatError, OrderError,
// RangeError with the 1-based data-row number.
std::vector<GazeRecord> parse_gaze_log(std::istream& in, int frame_width = 0, int frame_height = 0);
std::string serialize_gaze_log(std::span<const GazeRecord> records);

// Fixed ordered label set; the order defines the score-vector index.
class ClassTaxonomy {
 public:
  explicit ClassTaxonomy(std::vector<std::string> labels);
  static ClassTaxonomy default_gaze_targets();
  static ClassTaxonomy load(const std::filesystem::path& path);  // one label per line
  void save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& name(int index) const;
  int index_of(const std::string& name) const;  // TaxonomyError on unknown name
  const std::vector<std::string>& labels() const { return labels_; }
  bool operator==(const ClassTaxonomy& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

struct AnnotatedFrame {
  std::int64_t frame_index = 0;
  std::vector<int> labels;  // sorted unique taxonomy indices, non-empty
  std::string annotator;
  bool operator==(const AnnotatedFrame&) const = default;
};

// Annotation CSV: `frame,labels,annotator` with labels `;`-separated taxonomy
// names. The header row is optional on input and always written on output.
std::vector<AnnotatedFrame> parse_annotations(std::istream& in, const ClassTaxonomy& taxonomy);
std::string serialize_annotations(std::span<const AnnotatedFrame> frames, const ClassTaxonomy& taxonomy);

struct FrameKey {
  std::string video_id;
  std::int64_t frame_id = 0;
  bool operator==(const FrameKey&) const = default;
};

struct SplitManifest {
  struct VideoSplit {
    std::string video_id;
    std::vector<std::int64_t> train_ids;  // sorted ascending
    std::vector<std::int64_t> val_ids;    // sorted ascending
    bool operator==(const VideoSplit&) const = default;
  };
  std::uint64_t seed = 0;
  double ratio = 0.8;
  std::vector<VideoSplit> videos;  // sorted by video_id
  bool operator==(const SplitManifest&) const = default;
};

// Deterministic per-video stratified split: each video's train count is
// round(ratio * n). Identical inputs yield a byte-identical manifest.
SplitManifest split_dataset(std::span<const FrameKey> frames, double ratio, std::uint64_t seed);
std::string serialize_split(const SplitManifest& manifest);
SplitManifest parse_split(std::istream& in);

Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);
Image rotate180(const Image& img);  // the "diagonal" augmentation

// [original, horizontal, vertical, diagonal]; all dimension-preserving.
std::array<Image, 4> augment_flips(const Image& img);

}  // namespace gazekit
