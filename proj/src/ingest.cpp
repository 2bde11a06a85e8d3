#include "gazekit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "gazekit/errors.hpp"
#include "gazekit/rng.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

namespace {

constexpr const char* kGazeHeader = "frame,timestamp_ms,x,y,valid";
constexpr const char* kAnnotationHeader = "frame,labels,annotator";
constexpr const char* kSplitMagic = "gazekit-split 1";

bool parse_bool_flag(std::string_view s, bool& out) {
  if (s == "1" || s == "true") {
    out = true;
    return true;
  }
  if (s == "0" || s == "false") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

std::vector<GazeRecord> parse_gaze_log(std::istream& in, int frame_width, int frame_height) {
  std::string line;
  if (!get_line(in, line) || trim(line) != kGazeHeader)
    throw FormatError(std::string("missing gaze log header `") + kGazeHeader + "`");

  std::vector<GazeRecord> records;
  std::int64_t row = 0;
  while (get_line(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() != 5) throw FormatError("expected 5 fields", row);
    auto frame = parse_i64(fields[0]);
    auto ts = parse_i64(fields[1]);
    auto x = parse_i64(fields[2]);
    auto y = parse_i64(fields[3]);
    bool valid = false;
    if (!frame || !ts || !x || !y || !parse_bool_flag(fields[4], valid))
      throw FormatError("malformed field", row);
    if (*frame < 0) throw FormatError("negative frame index", row);
    if (*ts < 0) throw FormatError("negative timestamp", row);
    if (!records.empty() && *frame <= records.back().frame_index)
      throw OrderError("frame index not strictly increasing", row);
    if (valid) {
      bool in_range = *x >= 0 && *y >= 0 && (frame_width <= 0 || *x < frame_width) &&
                      (frame_height <= 0 || *y < frame_height);
      if (!in_range) throw RangeError("coordinate out of frame bounds for valid record", row);
    }
    records.push_back(GazeRecord{*frame, *ts, static_cast<int>(*x), static_cast<int>(*y), valid});
  }
  return records;
}

std::string serialize_gaze_log(std::span<const GazeRecord> records) {
  std::string out = kGazeHeader;
  out.push_back('\n');
  for (const auto& r : records) {
    out += std::to_string(r.frame_index);
    out.push_back(',');
    out += std::to_string(r.timestamp_ms);
    out.push_back(',');
    out += std::to_string(r.x);
    out.push_back(',');
    out += std::to_string(r.y);
    out.push_back(',');
    out += r.valid ? '1' : '0';
    out.push_back('\n');
  }
  return out;
}

ClassTaxonomy::ClassTaxonomy(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw EmptyInput("taxonomy needs at least one label");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw InvalidInput("empty taxonomy label");
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second)
      throw InvalidInput("duplicate taxonomy label: " + labels_[i]);
  }
}

ClassTaxonomy ClassTaxonomy::default_gaze_targets() {
  return ClassTaxonomy({"Infant", "Vitals Monitor", "Video Laryngoscope Screen", "Airway Equipment",
                        "Airway Provider", "Non-Team Member", "Other Physical Objects"});
}

ClassTaxonomy ClassTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy file: " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (get_line(in, line)) {
    auto t = trim(line);
    if (!t.empty()) labels.emplace_back(t);
  }
  return ClassTaxonomy(std::move(labels));
}

void ClassTaxonomy::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create taxonomy file: " + path.string());
  for (const auto& l : labels_) out << l << '\n';
}

const std::string& ClassTaxonomy::name(int index) const {
  if (index < 0 || index >= size()) throw RangeError("taxonomy index out of range");
  return labels_[static_cast<std::size_t>(index)];
}

int ClassTaxonomy::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw TaxonomyError("unknown class label: " + name);
  return it->second;
}

std::vector<AnnotatedFrame> parse_annotations(std::istream& in, const ClassTaxonomy& taxonomy) {
  std::vector<AnnotatedFrame> frames;
  std::string line;
  std::int64_t row = 0;
  bool first = true;
  while (get_line(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (first && t == kAnnotationHeader) {
      first = false;
      continue;
    }
    first = false;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() != 3) throw FormatError("expected 3 fields", row);
    auto frame = parse_i64(fields[0]);
    if (!frame || *frame < 0) throw FormatError("malformed frame index", row);
    if (trim(fields[1]).empty()) throw EmptyLabels("frame carries no labels", row);
    std::vector<int> labels;
    for (const auto& name : split(fields[1], ';')) {
      if (name.empty()) throw EmptyLabels("empty label name", row);
      try {
        labels.push_back(taxonomy.index_of(name));
      } catch (const TaxonomyError&) {
        throw TaxonomyError("unknown class label: " + name, row);
      }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    frames.push_back(AnnotatedFrame{*frame, std::move(labels), fields[2]});
  }
  return frames;
}

std::string serialize_annotations(std::span<const AnnotatedFrame> frames, const ClassTaxonomy& taxonomy) {
  std::string out = kAnnotationHeader;
  out.push_back('\n');
  for (const auto& f : frames) {
    out += std::to_string(f.frame_index);
    out.push_back(',');
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
      if (i) out.push_back(';');
      out += taxonomy.name(f.labels[i]);
    }
    out.push_back(',');
    out += f.annotator;
    out.push_back('\n');
  }
  return out;
}

SplitManifest split_dataset(std::span<const FrameKey> frames, double ratio, std::uint64_t seed) {
  if (frames.empty()) throw EmptyInput("no frames to split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("split ratio must lie in (0,1)");

  std::map<std::string, std::vector<std::int64_t>> by_video;
  for (const auto& f : frames) by_video[f.video_id].push_back(f.frame_id);

  SplitManifest manifest;
  manifest.seed = seed;
  manifest.ratio = ratio;
  for (auto& [video_id, ids] : by_video) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw InvalidInput("duplicate frame id in video " + video_id);

    Rng rng(Rng::mix(seed, Rng::fnv1a(video_id)));
    rng.shuffle(ids);
    auto n = static_cast<std::int64_t>(ids.size());
    auto n_train = std::llround(ratio * static_cast<double>(n));

    SplitManifest::VideoSplit vs;
    vs.video_id = video_id;
    vs.train_ids.assign(ids.begin(), ids.begin() + n_train);
    vs.val_ids.assign(ids.begin() + n_train, ids.end());
    std::sort(vs.train_ids.begin(), vs.train_ids.end());
    std::sort(vs.val_ids.begin(), vs.val_ids.end());
    manifest.videos.push_back(std::move(vs));
  }
  return manifest;
}

std::string serialize_split(const SplitManifest& manifest) {
  std::string out = kSplitMagic;
  out.push_back('\n');
  out += "seed " + std::to_string(manifest.seed) + "\n";
  out += "ratio " + format_double(manifest.ratio) + "\n";
  for (const auto& vs : manifest.videos) {
    out += "video " + vs.video_id + "\n";
    out += "train";
    for (auto id : vs.train_ids) out += " " + std::to_string(id);
    out.push_back('\n');
    out += "val";
    for (auto id : vs.val_ids) out += " " + std::to_string(id);
    out.push_back('\n');
  }
  return out;
}

SplitManifest parse_split(std::istream& in) {
  std::string line;
  if (!get_line(in, line) || trim(line) != kSplitMagic)
    throw FormatError("missing split manifest magic line");

  SplitManifest manifest;
  bool have_seed = false, have_ratio = false;
  SplitManifest::VideoSplit* current = nullptr;
  std::int64_t row = 1;
  while (get_line(in, line)) {
    ++row;
    auto t = trim(line);
    if (t.empty()) continue;
    auto space = t.find(' ');
    std::string key(t.substr(0, space));
    std::string rest = space == std::string_view::npos ? std::string() : std::string(t.substr(space + 1));
    if (key == "seed") {
      auto v = parse_u64(rest);
      if (!v) throw FormatError("malformed seed", row);
      manifest.seed = *v;
      have_seed = true;
    } else if (key == "ratio") {
      auto v = parse_double(rest);
      if (!v) throw FormatError("malformed ratio", row);
      manifest.ratio = *v;
      have_ratio = true;
    } else if (key == "video") {
      if (rest.empty()) throw FormatError("empty video id", row);
      manifest.videos.push_back(SplitManifest::VideoSplit{rest, {}, {}});
      current = &manifest.videos.back();
    } else if (key == "train" || key == "val") {
      if (!current) throw FormatError("id list before any video line", row);
      auto& ids = key == "train" ? current->train_ids : current->val_ids;
      for (const auto& tok : split(rest, ' ')) {
        if (tok.empty()) continue;
        auto v = parse_i64(tok);
        if (!v) throw FormatError("malformed frame id", row);
        ids.push_back(*v);
      }
    } else {
      throw FormatError("unknown manifest key: " + key, row);
    }
  }
  if (!have_seed || !have_ratio) throw FormatError("manifest missing seed or ratio");
  return manifest;
}

Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(img.width() - 1 - x, y, img.at(x, y));
  return out;
}

Image flip_vertical(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(x, img.height() - 1 - y, img.at(x, y));
  return out;
}

Image rotate180(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.set(img.width() - 1 - x, img.height() - 1 - y, img.at(x, y));
  return out;
}

std::array<Image, 4> augment_flips(const Image& img) {
  return {img, flip_horizontal(img), flip_vertical(img), rotate180(img)};
}

}  // namespace gazekit
