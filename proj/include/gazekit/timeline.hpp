#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazekit/ingest.hpp"

namespace gazekit {

// Per-frame semantic class sequence for one session; absent entries mark
// frames without a usable gaze estimate.
struct LabeledTimeline {
  std::string session_id;
  double fps = 25.0;
  std::vector<std::optional<int>> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t labeled_count() const;
  bool operator==(const LabeledTimeline&) const = default;
};

// CSV `frame,label` with one row per frame; the label field is a taxonomy
// name, empty for absent frames.
LabeledTimeline read_timeline_csv(std::istream& in, const ClassTaxonomy& taxonomy,
                                  std::string session_id = "", double fps = 25.0);
void write_timeline_csv(std::ostream& out, const LabeledTimeline& timeline, const ClassTaxonomy& taxonomy);
// Writes the session's true frame indices instead of positions 0..N-1; used
// when frame numbering is sparse.
void write_timeline_csv(std::ostream& out, const LabeledTimeline& timeline, const ClassTaxonomy& taxonomy,
                        std::span<const std::int64_t> frame_indices);

// Collapses annotations to a single-label timeline of length frame_count.
// Multi-label frames reduce to the lowest class index; frames with no
// annotation stay absent; on duplicate frame rows the later row wins.
LabeledTimeline timeline_from_annotations(std::span<const AnnotatedFrame> frames, std::size_t frame_count,
                                          std::string session_id = "", double fps = 25.0);

}  // namespace gazekit
