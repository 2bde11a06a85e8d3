#include "gazekit/timeline.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "gazekit/errors.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

std::size_t LabeledTimeline::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); }));
}

LabeledTimeline read_timeline_csv(std::istream& in, const ClassTaxonomy& taxonomy,
                                  std::string session_id, double fps) {
  std::string line;
  if (!get_line(in, line) || trim(line) != "frame,label")
    throw FormatError("missing timeline header `frame,label`");

  LabeledTimeline t;
  t.session_id = std::move(session_id);
  t.fps = fps;
  std::int64_t row = 0;
  std::int64_t prev = -1;
  while (get_line(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("expected 2 fields", row);
    auto frame = parse_i64(std::string_view(line).substr(0, comma));
    if (!frame || *frame < 0) throw FormatError("malformed frame index", row);
    if (*frame <= prev) throw OrderError("frame index not strictly increasing", row);
    std::string label(trim(std::string_view(line).substr(comma + 1)));

    // Rows may skip frames; the gap stays unlabeled.
    while (prev + 1 < *frame) {
      t.labels.push_back(std::nullopt);
      ++prev;
    }
    if (label.empty()) {
      t.labels.push_back(std::nullopt);
    } else {
      t.labels.push_back(taxonomy.index_of(label));
    }
    prev = *frame;
  }
  return t;
}

void write_timeline_csv(std::ostream& out, const LabeledTimeline& timeline, const ClassTaxonomy& taxonomy) {
  out << "frame,label\n";
  for (std::size_t i = 0; i < timeline.labels.size(); ++i) {
    out << i << ',';
    if (timeline.labels[i]) out << taxonomy.name(*timeline.labels[i]);
    out << '\n';
  }
}

void write_timeline_csv(std::ostream& out, const LabeledTimeline& timeline, const ClassTaxonomy& taxonomy,
                        std::span<const std::int64_t> frame_indices) {
  if (frame_indices.size() != timeline.labels.size())
    throw ShapeError("frame index list does not match timeline length");
  out << "frame,label\n";
  for (std::size_t i = 0; i < timeline.labels.size(); ++i) {
    out << frame_indices[i] << ',';
    if (timeline.labels[i]) out << taxonomy.name(*timeline.labels[i]);
    out << '\n';
  }
}

LabeledTimeline timeline_from_annotations(std::span<const AnnotatedFrame> frames, std::size_t frame_count,
                                          std::string session_id, double fps) {
  LabeledTimeline t;
  t.session_id = std::move(session_id);
  t.fps = fps;
  t.labels.assign(frame_count, std::nullopt);
  for (const auto& f : frames) {
    if (f.frame_index < 0 || static_cast<std::size_t>(f.frame_index) >= frame_count)
      throw RangeError("annotated frame outside timeline length");
    if (f.labels.empty()) throw EmptyLabels("annotated frame carries no labels");
    t.labels[static_cast<std::size_t>(f.frame_index)] = *std::min_element(f.labels.begin(), f.labels.end());
  }
  return t;
}

}  // namespace gazekit
