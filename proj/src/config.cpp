#include "gazekit/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gazekit/errors.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

namespace {

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

bool parse_flag(std::string_view v, std::int64_t row) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw FormatError("expected true or false", row);
}

double parse_num(std::string_view v, std::int64_t row) {
  auto d = parse_double(v);
  if (!d) throw FormatError("malformed number", row);
  return *d;
}

std::int64_t parse_int(std::string_view v, std::int64_t row) {
  auto i = parse_i64(v);
  if (!i) throw FormatError("malformed integer", row);
  return *i;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::istream& in) {
  PipelineConfig cfg;
  bool have_version = false;
  std::string line;
  std::int64_t row = 0;
  while (get_line(in, line)) {
    ++row;
    auto hash = line.find('#');
    std::string_view body = trim(hash == std::string::npos ? std::string_view(line)
                                                           : std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key = value", row);
    std::string key(trim(body.substr(0, eq)));
    std::string_view raw = trim(body.substr(eq + 1));
    std::string value = unquote(raw);

    if (key == "version") {
      if (parse_int(value, row) != 1) throw FormatError("unsupported config version", row);
      have_version = true;
    } else if (key == "taxonomy") {
      cfg.taxonomy_path = value;
    } else if (key == "crop_size") {
      cfg.crop_size = static_cast<int>(parse_int(value, row));
    } else if (key == "resize_to") {
      cfg.resize_to = static_cast<int>(parse_int(value, row));
    } else if (key == "use_mask") {
      cfg.use_mask = parse_flag(value, row);
    } else if (key == "segmenter") {
      if (value == "region-grow") cfg.segmenter = SegmenterKind::region_grow;
      else if (value == "external") cfg.segmenter = SegmenterKind::external;
      else throw FormatError("unknown segmenter: " + value, row);
    } else if (key == "tau") {
      cfg.tau = parse_num(value, row);
    } else if (key == "max_pixels") {
      cfg.max_pixels = static_cast<std::size_t>(parse_int(value, row));
    } else if (key == "masks_dir") {
      cfg.masks_dir = value;
    } else if (key == "classifier") {
      if (value == "zero-shot") cfg.classifier = ClassifierKind::zero_shot;
      else if (value == "adapter") cfg.classifier = ClassifierKind::adapter;
      else if (value == "probe") cfg.classifier = ClassifierKind::probe;
      else throw FormatError("unknown classifier: " + value, row);
    } else if (key == "fusion") {
      if (value == "mean") cfg.fusion = FusionMode::mean_prob;
      else if (value == "logit-mean") cfg.fusion = FusionMode::mean_logit;
      else throw FormatError("unknown fusion mode: " + value, row);
    } else if (key == "alpha") {
      cfg.alpha = parse_num(value, row);
    } else if (key == "beta") {
      cfg.beta = parse_num(value, row);
    } else if (key == "temperature") {
      cfg.temperature = parse_num(value, row);
    } else if (key == "crop_embeddings") {
      cfg.crop_embeddings_path = value;
    } else if (key == "mask_embeddings") {
      cfg.mask_embeddings_path = value;
    } else if (key == "class_embeddings") {
      cfg.class_embeddings_path = value;
    } else if (key == "cache") {
      cfg.cache_path = value;
    } else if (key == "mask_cache") {
      cfg.mask_cache_path = value;
    } else if (key == "probe") {
      cfg.probe_path = value;
    } else if (key == "mask_probe") {
      cfg.mask_probe_path = value;
    } else if (key == "gaze_source") {
      if (value == "log") cfg.gaze_source = GazeSource::log;
      else if (value == "detector") cfg.gaze_source = GazeSource::detector;
      else throw FormatError("unknown gaze source: " + value, row);
    } else if (key == "seed") {
      auto s = parse_u64(value);
      if (!s) throw FormatError("malformed seed", row);
      cfg.seed = *s;
    } else if (key == "streaming") {
      cfg.streaming = parse_flag(value, row);
    } else if (key == "queue_capacity") {
      cfg.queue_capacity = static_cast<std::size_t>(parse_int(value, row));
    } else if (key == "paced") {
      cfg.paced = parse_flag(value, row);
    } else {
      throw FormatError("unknown config key: " + key, row);
    }
  }
  if (!have_version) throw FormatError("config file missing `version = 1`");
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  return parse_pipeline_config(in);
}

void write_pipeline_config(std::ostream& out, const PipelineConfig& cfg) {
  out << "version = 1\n";
  if (!cfg.taxonomy_path.empty()) out << "taxonomy = \"" << cfg.taxonomy_path << "\"\n";
  out << "crop_size = " << cfg.crop_size << '\n';
  out << "resize_to = " << cfg.resize_to << '\n';
  out << "use_mask = " << (cfg.use_mask ? "true" : "false") << '\n';
  out << "segmenter = \"" << (cfg.segmenter == SegmenterKind::region_grow ? "region-grow" : "external")
      << "\"\n";
  out << "tau = " << format_double(cfg.tau) << '\n';
  out << "max_pixels = " << cfg.max_pixels << '\n';
  if (!cfg.masks_dir.empty()) out << "masks_dir = \"" << cfg.masks_dir << "\"\n";
  out << "classifier = \"";
  switch (cfg.classifier) {
    case ClassifierKind::zero_shot: out << "zero-shot"; break;
    case ClassifierKind::adapter: out << "adapter"; break;
    case ClassifierKind::probe: out << "probe"; break;
  }
  out << "\"\n";
  out << "fusion = \"" << (cfg.fusion == FusionMode::mean_prob ? "mean" : "logit-mean") << "\"\n";
  out << "alpha = " << format_double(cfg.alpha) << '\n';
  out << "beta = " << format_double(cfg.beta) << '\n';
  out << "temperature = " << format_double(cfg.temperature) << '\n';
  if (!cfg.crop_embeddings_path.empty()) out << "crop_embeddings = \"" << cfg.crop_embeddings_path << "\"\n";
  if (!cfg.mask_embeddings_path.empty()) out << "mask_embeddings = \"" << cfg.mask_embeddings_path << "\"\n";
  if (!cfg.class_embeddings_path.empty())
    out << "class_embeddings = \"" << cfg.class_embeddings_path << "\"\n";
  if (!cfg.cache_path.empty()) out << "cache = \"" << cfg.cache_path << "\"\n";
  if (!cfg.mask_cache_path.empty()) out << "mask_cache = \"" << cfg.mask_cache_path << "\"\n";
  if (!cfg.probe_path.empty()) out << "probe = \"" << cfg.probe_path << "\"\n";
  if (!cfg.mask_probe_path.empty()) out << "mask_probe = \"" << cfg.mask_probe_path << "\"\n";
  out << "gaze_source = \"" << (cfg.gaze_source == GazeSource::log ? "log" : "detector") << "\"\n";
  out << "seed = " << cfg.seed << '\n';
  out << "streaming = " << (cfg.streaming ? "true" : "false") << '\n';
  out << "queue_capacity = " << cfg.queue_capacity << '\n';
  out << "paced = " << (cfg.paced ? "true" : "false") << '\n';
}

}  // namespace gazekit
