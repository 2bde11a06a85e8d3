// gazekit command line: turns egocentric eye-tracking sessions into semantic
// gaze-target timelines, attention analytics and throughput reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gazekit/analytics.hpp"
#include "gazekit/bench.hpp"
#include "gazekit/classify.hpp"
#include "gazekit/config.hpp"
#include "gazekit/errors.hpp"
#include "gazekit/image_io.hpp"
#include "gazekit/locate.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/pipeline.hpp"
#include "gazekit/probe.hpp"
#include "gazekit/report.hpp"
#include "gazekit/synth.hpp"
#include "gazekit/text.hpp"

namespace fs = std::filesystem;
using namespace gazekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPipeline = 3;

void log_line(const std::string& level, std::int64_t frame, const std::string& message) {
  std::cerr << level << ',';
  if (frame >= 0) std::cerr << frame;
  std::cerr << ',' << message << '\n';
}

ClassTaxonomy taxonomy_from(const std::string& path) {
  return path.empty() ? ClassTaxonomy::default_gaze_targets() : ClassTaxonomy::load(path);
}

std::vector<AnnotatedFrame> load_annotations_file(const std::string& path, const ClassTaxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations file: " + path);
  return parse_annotations(in, taxonomy);
}

LabeledTimeline load_timeline_file(const std::string& path, const ClassTaxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open timeline file: " + path);
  return read_timeline_csv(in, taxonomy, fs::path(path).stem().string());
}

std::ofstream must_create(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create output file: " + path.string());
  return out;
}

// `frame,status,<probs...>` rows written by the classify subcommand.
std::vector<std::pair<std::int64_t, std::optional<ClassScores>>> load_scores_csv(
    const std::string& path, const ClassTaxonomy& taxonomy, ScoreKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scores file: " + path);
  std::string line;
  if (!get_line(in, line) || line.rfind("frame,status", 0) != 0)
    throw FormatError("missing scores header");
  std::vector<std::pair<std::int64_t, std::optional<ClassScores>>> rows;
  std::int64_t row = 0;
  while (get_line(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() != 2 + static_cast<std::size_t>(taxonomy.size()))
      throw FormatError("unexpected scores column count", row);
    auto frame = parse_i64(fields[0]);
    if (!frame) throw FormatError("malformed frame index", row);
    if (fields[1] != "ok") {
      rows.emplace_back(*frame, std::nullopt);
      continue;
    }
    ClassScores scores;
    scores.kind = kind;
    for (int k = 0; k < taxonomy.size(); ++k) {
      auto v = parse_double(fields[2 + static_cast<std::size_t>(k)]);
      if (!v) throw FormatError("malformed score", row);
      scores.probs.push_back(*v);
    }
    rows.emplace_back(*frame, std::move(scores));
  }
  return rows;
}

// Shared classify-pipeline flag block; explicitly passed flags override the
// config file.
struct PipelineFlags {
  std::string config_path;
  PipelineConfig flags;
  std::string segmenter_name = "region-grow";
  std::string classifier_name = "zero-shot";
  std::string fusion_name = "mean";
  std::string gaze_source_name = "log";
  bool streaming_flag = false;
  bool paced_flag = false;
  bool no_mask_flag = false;

  CLI::Option* opt_taxonomy = nullptr;
  CLI::Option* opt_crop = nullptr;
  CLI::Option* opt_resize = nullptr;
  CLI::Option* opt_no_mask = nullptr;
  CLI::Option* opt_segmenter = nullptr;
  CLI::Option* opt_tau = nullptr;
  CLI::Option* opt_max_pixels = nullptr;
  CLI::Option* opt_masks_dir = nullptr;
  CLI::Option* opt_classifier = nullptr;
  CLI::Option* opt_fusion = nullptr;
  CLI::Option* opt_alpha = nullptr;
  CLI::Option* opt_beta = nullptr;
  CLI::Option* opt_temperature = nullptr;
  CLI::Option* opt_cache = nullptr;
  CLI::Option* opt_probe = nullptr;
  CLI::Option* opt_class_embeddings = nullptr;
  CLI::Option* opt_crop_embeddings = nullptr;
  CLI::Option* opt_mask_embeddings = nullptr;
  CLI::Option* opt_gaze_source = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_streaming = nullptr;
  CLI::Option* opt_paced = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config file (version = 1)");
    opt_taxonomy = cmd->add_option("--taxonomy", flags.taxonomy_path, "taxonomy file, one label per line");
    opt_crop = cmd->add_option("--crop-size", flags.crop_size, "gaze-centered crop side");
    opt_resize = cmd->add_option("--resize-to", flags.resize_to, "classifier input side");
    opt_no_mask = cmd->add_flag("--no-mask", no_mask_flag, "classify the crop only");
    opt_segmenter = cmd->add_option("--segmenter", segmenter_name, "region-grow | external");
    opt_tau = cmd->add_option("--tau", flags.tau, "region-grow color threshold");
    opt_max_pixels = cmd->add_option("--max-pixels", flags.max_pixels, "region-grow growth cap");
    opt_masks_dir = cmd->add_option("--masks-dir", flags.masks_dir, "precomputed PBM mask root");
    opt_classifier = cmd->add_option("--classifier", classifier_name, "zero-shot | adapter | probe");
    opt_fusion = cmd->add_option("--fusion", fusion_name, "mean | logit-mean");
    opt_alpha = cmd->add_option("--alpha", flags.alpha, "adapter residual weight");
    opt_beta = cmd->add_option("--beta", flags.beta, "adapter affinity sharpness");
    opt_temperature = cmd->add_option("--temperature", flags.temperature, "similarity softmax temperature");
    opt_cache = cmd->add_option("--cache", flags.cache_path, "few-shot cache file");
    opt_probe = cmd->add_option("--probe", flags.probe_path, "linear probe file");
    opt_class_embeddings =
        cmd->add_option("--class-embeddings", flags.class_embeddings_path, "class anchor file");
    opt_crop_embeddings =
        cmd->add_option("--crop-embeddings", flags.crop_embeddings_path, "per-frame crop embeddings");
    opt_mask_embeddings =
        cmd->add_option("--mask-embeddings", flags.mask_embeddings_path, "per-frame mask embeddings");
    opt_gaze_source = cmd->add_option("--gaze-source", gaze_source_name, "log | detector");
    opt_seed = cmd->add_option("--seed", flags.seed, "deterministic seed");
    opt_streaming = cmd->add_flag("--streaming", streaming_flag, "run stages on bounded queues");
    opt_paced = cmd->add_flag("--paced", paced_flag, "replay at 25 frames per second");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_pipeline_config(config_path);
    auto given = [](CLI::Option* opt) { return opt && opt->count() > 0; };
    if (given(opt_taxonomy)) cfg.taxonomy_path = flags.taxonomy_path;
    if (given(opt_crop)) cfg.crop_size = flags.crop_size;
    if (given(opt_resize)) cfg.resize_to = flags.resize_to;
    if (given(opt_no_mask)) cfg.use_mask = !no_mask_flag;
    if (given(opt_segmenter)) {
      if (segmenter_name == "region-grow") cfg.segmenter = SegmenterKind::region_grow;
      else if (segmenter_name == "external") cfg.segmenter = SegmenterKind::external;
      else throw InvalidInput("unknown segmenter: " + segmenter_name);
    }
    if (given(opt_tau)) cfg.tau = flags.tau;
    if (given(opt_max_pixels)) cfg.max_pixels = flags.max_pixels;
    if (given(opt_masks_dir)) cfg.masks_dir = flags.masks_dir;
    if (given(opt_classifier)) {
      if (classifier_name == "zero-shot") cfg.classifier = ClassifierKind::zero_shot;
      else if (classifier_name == "adapter") cfg.classifier = ClassifierKind::adapter;
      else if (classifier_name == "probe") cfg.classifier = ClassifierKind::probe;
      else throw InvalidInput("unknown classifier: " + classifier_name);
    }
    if (given(opt_fusion)) {
      if (fusion_name == "mean") cfg.fusion = FusionMode::mean_prob;
      else if (fusion_name == "logit-mean") cfg.fusion = FusionMode::mean_logit;
      else throw InvalidInput("unknown fusion mode: " + fusion_name);
    }
    if (given(opt_alpha)) cfg.alpha = flags.alpha;
    if (given(opt_beta)) cfg.beta = flags.beta;
    if (given(opt_temperature)) cfg.temperature = flags.temperature;
    if (given(opt_cache)) cfg.cache_path = flags.cache_path;
    if (given(opt_probe)) cfg.probe_path = flags.probe_path;
    if (given(opt_class_embeddings)) cfg.class_embeddings_path = flags.class_embeddings_path;
    if (given(opt_crop_embeddings)) cfg.crop_embeddings_path = flags.crop_embeddings_path;
    if (given(opt_mask_embeddings)) cfg.mask_embeddings_path = flags.mask_embeddings_path;
    if (given(opt_gaze_source)) {
      if (gaze_source_name == "log") cfg.gaze_source = GazeSource::log;
      else if (gaze_source_name == "detector") cfg.gaze_source = GazeSource::detector;
      else throw InvalidInput("unknown gaze source: " + gaze_source_name);
    }
    if (given(opt_seed)) cfg.seed = flags.seed;
    if (given(opt_streaming)) cfg.streaming = streaming_flag;
    if (given(opt_paced)) cfg.paced = paced_flag;
    cfg.log = log_line;
    return cfg;
  }
};

std::vector<GazeVisit> parse_path_script(const std::string& script) {
  std::vector<GazeVisit> path;
  for (const auto& part : split(script, ',')) {
    if (part.empty()) continue;
    auto colon = part.find(':');
    if (colon == std::string::npos) throw InvalidInput("path entries look like class:frames");
    auto cls = parse_i64(part.substr(0, colon));
    auto frames = parse_i64(part.substr(colon + 1));
    if (!cls || !frames) throw InvalidInput("malformed path entry: " + part);
    path.push_back(GazeVisit{static_cast<int>(*cls), static_cast<int>(*frames)});
  }
  return path;
}

// Single-label reduction shared by adapt and train-probe.
int primary_label(const AnnotatedFrame& frame) {
  return *std::min_element(frame.labels.begin(), frame.labels.end());
}

int cmd_ingest(const std::string& session_dir, const std::string& taxonomy_path,
               const std::string& annotations_path) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto session = load_session_dir(session_dir);
  std::size_t valid = 0;
  for (const auto& g : session.gaze)
    if (g.valid) ++valid;

  std::cout << "session " << session.session_id << '\n';
  std::cout << "frames " << session.frames->size() << '\n';
  std::cout << "gaze_records " << session.gaze.size() << '\n';
  std::cout << "gaze_valid " << valid << '\n';
  if (!annotations_path.empty()) {
    auto annotations = load_annotations_file(annotations_path, taxonomy);
    std::vector<std::size_t> per_class(static_cast<std::size_t>(taxonomy.size()), 0);
    for (const auto& a : annotations)
      for (int l : a.labels) ++per_class[static_cast<std::size_t>(l)];
    std::cout << "annotated_frames " << annotations.size() << '\n';
    for (int k = 0; k < taxonomy.size(); ++k)
      std::cout << "class_count," << taxonomy.name(k) << ',' << per_class[static_cast<std::size_t>(k)]
                << '\n';
  }
  return kExitOk;
}

int cmd_split(const std::string& frames_path, double ratio, std::uint64_t seed, const std::string& out) {
  std::ifstream in(frames_path);
  if (!in) throw IoError("cannot open frames list: " + frames_path);
  std::vector<FrameKey> keys;
  std::string line;
  std::int64_t row = 0;
  bool first = true;
  while (get_line(in, line)) {
    if (trim(line).empty()) continue;
    if (first && trim(line) == "video_id,frame_id") {
      first = false;
      continue;
    }
    first = false;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() != 2) throw FormatError("expected video_id,frame_id", row);
    auto id = parse_i64(fields[1]);
    if (!id) throw FormatError("malformed frame id", row);
    keys.push_back(FrameKey{fields[0], *id});
  }
  auto manifest = split_dataset(keys, ratio, seed);
  auto file = must_create(out);
  file << serialize_split(manifest);
  return kExitOk;
}

int cmd_locate(const std::string& session_dir, const std::string& out) {
  auto session = load_session_dir(session_dir);
  auto file = must_create(out);
  file << "frame,x,y\n";
  for (std::size_t pos = 0; pos < session.frames->size(); ++pos) {
    auto dot = find_gaze_dot(session.frames->frame(pos));
    file << session.frames->frame_index(pos) << ',' << dot.x << ',' << dot.y << '\n';
  }
  return kExitOk;
}

int cmd_segment(const std::string& session_dir, const std::string& out_dir, double tau,
                std::size_t max_pixels, const std::string& gaze_source, int resize_to,
                const std::string& render_dir) {
  auto session = load_session_dir(session_dir);
  RegionGrowConfig cfg{tau, max_pixels};
  fs::create_directories(fs::path(out_dir) / session.session_id);
  if (!render_dir.empty()) fs::create_directories(render_dir);

  std::map<std::int64_t, const GazeRecord*> by_frame;
  for (const auto& g : session.gaze) by_frame[g.frame_index] = &g;

  std::size_t written = 0;
  for (std::size_t pos = 0; pos < session.frames->size(); ++pos) {
    std::int64_t index = session.frames->frame_index(pos);
    Image frame = session.frames->frame(pos);
    PixelPoint seed;
    if (gaze_source == "detector") {
      seed = find_gaze_dot(frame);
    } else {
      auto it = by_frame.find(index);
      if (it == by_frame.end() || !it->second->valid) {
        log_line("info", index, "no valid gaze estimate");
        continue;
      }
      seed = PixelPoint{it->second->x, it->second->y};
    }
    Mask mask = grow_region(frame, seed, cfg);
    save_mask_pbm(fs::path(out_dir) / session.session_id / (std::to_string(index) + ".pbm"), mask);
    if (!render_dir.empty())
      save_image(fs::path(render_dir) / (std::to_string(index) + ".ppm"),
                 render_masked(frame, mask, resize_to));
    ++written;
  }
  std::cout << "masks " << written << '\n';
  return kExitOk;
}

int cmd_classify(const PipelineFlags& pf, const std::string& session_dir, const std::string& out_dir) {
  auto cfg = pf.resolve();
  auto session = load_session_dir(session_dir);
  auto components = load_components(cfg, session.session_id);
  auto result = run_pipeline(cfg, components, session);

  fs::create_directories(out_dir);
  {
    std::vector<std::int64_t> indices;
    for (std::size_t pos = 0; pos < session.frames->size(); ++pos)
      indices.push_back(session.frames->frame_index(pos));
    auto out = must_create(fs::path(out_dir) / "timeline.csv");
    write_timeline_csv(out, result.timeline, components.taxonomy, indices);
  }
  {
    auto out = must_create(fs::path(out_dir) / "scores.csv");
    write_scores_csv(out, result, components.taxonomy);
  }
  {
    auto out = must_create(fs::path(out_dir) / "config.txt");
    write_pipeline_config(out, cfg);
  }
  std::cout << "frames " << result.timeline.labels.size() << '\n';
  std::cout << "labeled " << result.produced << '\n';
  std::cout << "skipped " << result.skipped << '\n';
  return kExitOk;
}

int cmd_adapt(const std::string& embeddings_path, const std::string& annotations_path,
              const std::string& taxonomy_path, int shots, double alpha, double beta,
              const std::string& out) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto store = EmbeddingStore::load(embeddings_path);
  auto annotations = load_annotations_file(annotations_path, taxonomy);

  FewShotCache cache;
  cache.num_classes = taxonomy.size();
  cache.alpha = alpha;
  cache.beta = beta;
  std::vector<int> taken(static_cast<std::size_t>(taxonomy.size()), 0);
  const int per_class = std::min(shots, FewShotCache::kMaxPerClass);
  for (const auto& a : annotations) {
    int label = primary_label(a);
    if (taken[static_cast<std::size_t>(label)] >= per_class) continue;
    try {
      cache.add(store.lookup(a.frame_index), label);
      ++taken[static_cast<std::size_t>(label)];
    } catch (const LookupError&) {
      log_line("info", a.frame_index, "no embedding for annotated frame");
    }
  }
  if (cache.size() == 0) throw EmptyCache("no annotated frames had embeddings");
  cache.save(out);
  std::cout << "cache_entries " << cache.size() << '\n';
  return kExitOk;
}

int cmd_train_probe(const std::string& embeddings_path, const std::string& annotations_path,
                    const std::string& taxonomy_path, bool multi_label, const TrainConfig& train_cfg,
                    const std::string& out, const std::string& loss_out) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto store = EmbeddingStore::load(embeddings_path);
  auto annotations = load_annotations_file(annotations_path, taxonomy);

  std::vector<const AnnotatedFrame*> usable;
  for (const auto& a : annotations) {
    try {
      store.lookup(a.frame_index);
      usable.push_back(&a);
    } catch (const LookupError&) {
      log_line("info", a.frame_index, "no embedding for annotated frame");
    }
  }
  if (usable.empty()) throw EmptyInput("no annotated frames had embeddings");

  const int d = store.dim();
  const int K = taxonomy.size();
  Matrix features(usable.size(), static_cast<std::size_t>(d));
  Matrix targets(usable.size(), static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& e = store.lookup(usable[i]->frame_index);
    std::copy(e.values.begin(), e.values.end(), features.data.begin() + i * static_cast<std::size_t>(d));
    if (multi_label) {
      for (int l : usable[i]->labels) targets.at(i, static_cast<std::size_t>(l)) = 1.0;
    } else {
      targets.at(i, static_cast<std::size_t>(primary_label(*usable[i]))) = 1.0;
    }
  }

  auto result = train_probe(features, targets, multi_label ? HeadMode::multi_label : HeadMode::single_label,
                            train_cfg);
  result.probe.save(out);
  if (!loss_out.empty()) {
    auto file = must_create(loss_out);
    file << "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
      file << e << ',' << format_double(result.epoch_loss[e]) << '\n';
  }
  std::cout << "samples " << usable.size() << '\n';
  if (!result.epoch_loss.empty()) std::cout << "final_loss " << result.epoch_loss.back() << '\n';
  return kExitOk;
}

int cmd_evaluate(const std::string& scores_path, const std::string& truth_path,
                 const std::string& taxonomy_path, bool multi_label, double threshold,
                 const std::string& out) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto scores = load_scores_csv(scores_path, taxonomy,
                                multi_label ? ScoreKind::multi_label : ScoreKind::single_label);
  auto annotations = load_annotations_file(truth_path, taxonomy);
  std::map<std::int64_t, const AnnotatedFrame*> truth_by_frame;
  for (const auto& a : annotations) truth_by_frame[a.frame_index] = &a;

  std::vector<EvalRecord> records;
  for (const auto& [frame, s] : scores) {
    if (!s) continue;
    auto it = truth_by_frame.find(frame);
    if (it == truth_by_frame.end()) continue;
    records.push_back(EvalRecord{*s, it->second->labels});
  }
  if (records.empty()) throw EmptyInput("no scored frames had ground truth");

  std::vector<std::pair<std::string, double>> metrics;
  if (multi_label) {
    metrics.emplace_back("map", mean_average_precision(records));
    metrics.emplace_back("f1_micro", f1_multilabel(records, threshold));
    metrics.emplace_back("f1_macro", f1_multilabel(records, threshold, F1Average::macro));
  } else {
    metrics.emplace_back("top1", top_k_accuracy(records, 1));
    metrics.emplace_back("top3", top_k_accuracy(records, std::min(3, taxonomy.size())));
  }
  metrics.emplace_back("records", static_cast<double>(records.size()));

  if (out.empty() || out == "-") {
    write_metrics_csv(std::cout, metrics);
  } else {
    auto file = must_create(out);
    write_metrics_csv(file, metrics);
    write_metrics_text(std::cout, metrics);
  }
  return kExitOk;
}

int cmd_kappa(const std::string& a_path, const std::string& b_path, const std::string& taxonomy_path) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto a = load_timeline_file(a_path, taxonomy);
  auto b = load_timeline_file(b_path, taxonomy);
  std::vector<std::pair<std::string, double>> metrics{{"cohens_kappa", cohens_kappa(a, b)}};
  write_metrics_csv(std::cout, metrics);
  return kExitOk;
}

int cmd_analyze(const std::string& timeline_path, const std::string& truth_path,
                const std::string& taxonomy_path, double alpha, bool collapse, const std::string& out_dir) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto pred = load_timeline_file(timeline_path, taxonomy);
  std::optional<LabeledTimeline> truth;
  if (!truth_path.empty()) truth = load_timeline_file(truth_path, taxonomy);

  ReportInputs inputs;
  inputs.taxonomy = &taxonomy;
  inputs.predicted = &pred;
  inputs.truth = truth ? &*truth : nullptr;
  inputs.alpha = alpha;
  inputs.collapse_runs = collapse;
  emit_report(out_dir, inputs);

  // The analyze subcommand is the CSV-only view; drop the charts.
  for (const char* svg : {"frequency_bars.svg", "transition_heatmap.svg", "timeline_strip.svg"})
    fs::remove(fs::path(out_dir) / svg);
  return kExitOk;
}

int cmd_report(const std::string& timeline_path, const std::string& truth_path,
               const std::string& metrics_path, const std::string& bench_path,
               const std::string& taxonomy_path, double alpha, bool collapse,
               const std::string& out_dir) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  auto pred = load_timeline_file(timeline_path, taxonomy);
  std::optional<LabeledTimeline> truth;
  if (!truth_path.empty()) truth = load_timeline_file(truth_path, taxonomy);

  ReportInputs inputs;
  inputs.taxonomy = &taxonomy;
  inputs.predicted = &pred;
  inputs.truth = truth ? &*truth : nullptr;
  inputs.alpha = alpha;
  inputs.collapse_runs = collapse;

  if (!metrics_path.empty()) {
    std::ifstream in(metrics_path);
    if (!in) throw IoError("cannot open metrics file: " + metrics_path);
    std::string line;
    if (!get_line(in, line) || trim(line) != "metric,value") throw FormatError("missing metrics header");
    while (get_line(in, line)) {
      if (trim(line).empty()) continue;
      auto fields = split(line, ',');
      if (fields.size() != 2) throw FormatError("expected metric,value");
      auto v = parse_double(fields[1]);
      if (!v) throw FormatError("malformed metric value");
      inputs.metrics.emplace_back(fields[0], *v);
    }
  }
  emit_report(out_dir, inputs);
  if (!bench_path.empty()) {
    // Included verbatim; the bench subcommand already formats these tables.
    fs::copy_file(bench_path, fs::path(out_dir) / "bench.csv", fs::copy_options::overwrite_existing);
  }
  return kExitOk;
}

int cmd_synth(int frames, int width, int height, std::uint64_t seed, double noise, bool no_dot,
              int gaze_margin, const std::string& path_script, const std::string& taxonomy_path,
              const std::string& out) {
  auto taxonomy = taxonomy_from(taxonomy_path);
  SyntheticSessionSpec spec;
  spec.frame_count = frames;
  spec.width = width;
  spec.height = height;
  spec.seed = seed;
  spec.noise_level = noise;
  spec.render_dot = !no_dot;
  spec.gaze_margin = gaze_margin;
  if (!path_script.empty()) spec.path = parse_path_script(path_script);
  auto session = generate_synthetic_session(spec, taxonomy);
  write_session_dir(out, session, taxonomy);
  std::cout << "frames " << session.frames.size() << '\n';
  return kExitOk;
}

int cmd_bench(int width, int height, std::vector<int> batch_sizes, int reps, int warmup,
              int frames_per_rep, std::uint64_t seed, const std::string& out_dir) {
  // Synthetic full-rate frames feed the stage under test; generation happens
  // outside the timed sections.
  SyntheticSessionSpec spec;
  spec.frame_count = 1;
  spec.width = width;
  spec.height = height;
  spec.seed = seed;
  auto taxonomy = ClassTaxonomy::default_gaze_targets();
  auto base = generate_synthetic_session(spec, taxonomy);

  auto extractor = std::make_shared<BuiltinExtractor>();
  auto anchors = ClassEmbeddings::random_unit(taxonomy, extractor->dim(), seed);
  RegionGrowConfig grow_cfg;

  BatchStage zero_shot_crop = [&](std::span<const Image> batch) {
    for (const Image& frame : batch) {
      auto dot = find_gaze_dot(frame);
      Image crop = resize_bilinear(crop_square(frame, dot, CropSpec{}), 224);
      auto scores = zero_shot_scores(extractor->extract(crop, 0), anchors);
      (void)predict_topk(scores, 1);
    }
  };
  BatchStage zero_shot_crop_mask = [&](std::span<const Image> batch) {
    for (const Image& frame : batch) {
      auto dot = find_gaze_dot(frame);
      Image crop = resize_bilinear(crop_square(frame, dot, CropSpec{}), 224);
      auto crop_scores = zero_shot_scores(extractor->extract(crop, 0), anchors);
      Mask mask = grow_region(frame, dot, grow_cfg);
      auto mask_scores = zero_shot_scores(extractor->extract(render_masked(frame, mask, 224), 0), anchors);
      (void)predict_topk(fuse_scores(crop_scores, mask_scores), 1);
    }
  };

  std::vector<std::pair<std::string, BatchStage>> pipelines;
  pipelines.emplace_back("locate_crop_zero_shot", zero_shot_crop);
  pipelines.emplace_back("locate_crop_mask_zero_shot", zero_shot_crop_mask);

  std::vector<BenchConfig> configs;
  for (int bs : batch_sizes) {
    BenchConfig cfg;
    cfg.batch_size = bs;
    cfg.repetitions = reps;
    cfg.warmup_batches = warmup;
    cfg.frames_per_rep = frames_per_rep;
    configs.push_back(cfg);
  }

  auto make_source = [&](const BenchConfig&) -> FrameSource {
    return [&base]() -> std::optional<Image> { return base.frames.front(); };
  };
  auto reports = bench_matrix(pipelines, configs, make_source);

  fs::create_directories(out_dir);
  {
    auto raw = must_create(fs::path(out_dir) / "bench.csv");
    write_bench_csv(raw, reports);
  }
  {
    auto summary = must_create(fs::path(out_dir) / "bench_summary.csv");
    write_bench_summary_csv(summary, reports);
  }
  write_bench_summary_csv(std::cout, reports);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic gaze classification and attention analytics for egocentric eye tracking"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "validate a session directory and summarize it");
  std::string ingest_session, ingest_taxonomy, ingest_annotations;
  ingest->add_option("--session", ingest_session, "session directory")->required();
  ingest->add_option("--taxonomy", ingest_taxonomy, "taxonomy file");
  ingest->add_option("--annotations", ingest_annotations, "annotations CSV");

  auto* split_cmd = app.add_subcommand("split", "deterministic stratified train/val split");
  std::string split_frames, split_out;
  double split_ratio = 0.8;
  std::uint64_t split_seed = 0;
  split_cmd->add_option("--frames", split_frames, "CSV of video_id,frame_id")->required();
  split_cmd->add_option("--ratio", split_ratio, "train fraction in (0,1)");
  split_cmd->add_option("--seed", split_seed, "shuffle seed");
  split_cmd->add_option("--out", split_out, "manifest output file")->required();

  auto* locate_cmd = app.add_subcommand("locate", "detect the rendered gaze dot per frame");
  std::string locate_session, locate_out;
  locate_cmd->add_option("--session", locate_session, "session directory")->required();
  locate_cmd->add_option("--out", locate_out, "CSV output file")->required();

  auto* segment_cmd = app.add_subcommand("segment", "grow point-prompted masks for each frame");
  std::string segment_session, segment_out, segment_render, segment_gaze_source = "log";
  double segment_tau = 32.0;
  std::size_t segment_max_pixels = 1u << 20;
  int segment_resize = 224;
  segment_cmd->add_option("--session", segment_session, "session directory")->required();
  segment_cmd->add_option("--out", segment_out, "mask output root")->required();
  segment_cmd->add_option("--render", segment_render, "also write masked renders here");
  segment_cmd->add_option("--tau", segment_tau, "color threshold");
  segment_cmd->add_option("--max-pixels", segment_max_pixels, "growth cap");
  segment_cmd->add_option("--resize-to", segment_resize, "masked render side");
  segment_cmd->add_option("--gaze-source", segment_gaze_source, "log | detector");

  auto* classify_cmd = app.add_subcommand("classify", "run the full per-frame pipeline");
  std::string classify_session, classify_out;
  PipelineFlags classify_flags;
  classify_cmd->add_option("--session", classify_session, "session directory")->required();
  classify_cmd->add_option("--out", classify_out, "output directory")->required();
  classify_flags.attach(classify_cmd);

  auto* adapt_cmd = app.add_subcommand("adapt", "build a few-shot cache from embeddings");
  std::string adapt_embeddings, adapt_annotations, adapt_taxonomy, adapt_out;
  int adapt_shots = 16;
  double adapt_alpha = 1.0, adapt_beta = 5.5;
  adapt_cmd->add_option("--embeddings", adapt_embeddings, "per-frame embedding file")->required();
  adapt_cmd->add_option("--annotations", adapt_annotations, "annotations CSV")->required();
  adapt_cmd->add_option("--taxonomy", adapt_taxonomy, "taxonomy file");
  adapt_cmd->add_option("--shots", adapt_shots, "max keys per class (up to 16)");
  adapt_cmd->add_option("--alpha", adapt_alpha, "residual weight");
  adapt_cmd->add_option("--beta", adapt_beta, "affinity sharpness");
  adapt_cmd->add_option("--out", adapt_out, "cache output file")->required();

  auto* train_cmd = app.add_subcommand("train-probe", "train a linear probe on embeddings");
  std::string train_embeddings, train_annotations, train_taxonomy, train_out, train_loss_out;
  bool train_multi = false;
  TrainConfig train_cfg;
  std::string train_milestones;
  train_cmd->add_option("--embeddings", train_embeddings, "per-frame embedding file")->required();
  train_cmd->add_option("--annotations", train_annotations, "annotations CSV")->required();
  train_cmd->add_option("--taxonomy", train_taxonomy, "taxonomy file");
  train_cmd->add_flag("--multi-label", train_multi, "sigmoid head with binary cross-entropy");
  train_cmd->add_option("--lr", train_cfg.lr, "learning rate");
  train_cmd->add_option("--momentum", train_cfg.momentum, "momentum");
  train_cmd->add_option("--weight-decay", train_cfg.weight_decay, "weight decay");
  train_cmd->add_option("--epochs", train_cfg.epochs, "epochs");
  train_cmd->add_option("--batch-size", train_cfg.batch_size, "batch size");
  train_cmd->add_option("--gamma", train_cfg.gamma, "milestone decay factor");
  train_cmd->add_option("--milestones", train_milestones, "comma list of epochs");
  train_cmd->add_option("--seed", train_cfg.seed, "deterministic seed");
  train_cmd->add_option("--out", train_out, "probe output file")->required();
  train_cmd->add_option("--loss-out", train_loss_out, "per-epoch loss CSV");

  auto* eval_cmd = app.add_subcommand("evaluate", "metrics from a scores file and ground truth");
  std::string eval_scores, eval_truth, eval_taxonomy, eval_out;
  bool eval_multi = false;
  double eval_threshold = 0.5;
  std::vector<std::string> eval_kappa;
  eval_cmd->add_option("--scores", eval_scores, "scores CSV from classify");
  eval_cmd->add_option("--truth", eval_truth, "annotations CSV");
  eval_cmd->add_option("--taxonomy", eval_taxonomy, "taxonomy file");
  eval_cmd->add_flag("--multi-label", eval_multi, "report mAP and F1 instead of top-k");
  eval_cmd->add_option("--threshold", eval_threshold, "multi-label decision threshold");
  eval_cmd->add_option("--out", eval_out, "metrics CSV output (default stdout)");
  eval_cmd->add_option("--kappa", eval_kappa, "two timeline CSVs for annotator agreement")->expected(2);

  auto* analyze_cmd = app.add_subcommand("analyze", "attention analytics tables from a timeline");
  std::string analyze_timeline, analyze_truth, analyze_taxonomy, analyze_out;
  double analyze_alpha = 0.05;
  bool analyze_collapse = false;
  analyze_cmd->add_option("--timeline", analyze_timeline, "predicted timeline CSV")->required();
  analyze_cmd->add_option("--truth", analyze_truth, "ground-truth timeline CSV");
  analyze_cmd->add_option("--taxonomy", analyze_taxonomy, "taxonomy file");
  analyze_cmd->add_option("--alpha", analyze_alpha, "significance level");
  analyze_cmd->add_flag("--collapse-runs", analyze_collapse, "count class changes only");
  analyze_cmd->add_option("--out", analyze_out, "output directory")->required();

  auto* bench_cmd = app.add_subcommand("bench", "throughput of the built-in pipelines");
  int bench_width = 1920, bench_height = 1080, bench_reps = 10, bench_warmup = 10, bench_frames = 50;
  std::vector<int> bench_batches{1, 8};
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  bench_cmd->add_option("--width", bench_width, "frame width");
  bench_cmd->add_option("--height", bench_height, "frame height");
  bench_cmd->add_option("--batch-size", bench_batches, "batch sizes to test");
  bench_cmd->add_option("--reps", bench_reps, "timed repetitions");
  bench_cmd->add_option("--warmup", bench_warmup, "untimed warm-up batches");
  bench_cmd->add_option("--frames-per-rep", bench_frames, "frames per repetition");
  bench_cmd->add_option("--seed", bench_seed, "frame generator seed");
  bench_cmd->add_option("--out", bench_out, "output directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scripted session");
  int synth_frames = 500, synth_width = 640, synth_height = 360;
  std::uint64_t synth_seed = 0;
  double synth_noise = 0.0;
  bool synth_no_dot = false;
  int synth_gaze_margin = 4;
  std::string synth_path, synth_taxonomy, synth_out;
  synth_cmd->add_option("--frames", synth_frames, "frame count");
  synth_cmd->add_option("--width", synth_width, "frame width");
  synth_cmd->add_option("--height", synth_height, "frame height");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--noise", synth_noise, "scene noise amplitude");
  synth_cmd->add_flag("--no-dot", synth_no_dot, "skip rendering the gaze dot");
  synth_cmd->add_option("--gaze-margin", synth_gaze_margin, "fixation inset from region edges");
  synth_cmd->add_option("--path", synth_path, "gaze script class:frames,class:frames,...");
  synth_cmd->add_option("--taxonomy", synth_taxonomy, "taxonomy file");
  synth_cmd->add_option("--out", synth_out, "session output directory")->required();

  auto* report_cmd = app.add_subcommand("report", "CSV tables plus SVG charts");
  std::string report_timeline, report_truth, report_metrics, report_bench, report_taxonomy, report_out;
  double report_alpha = 0.05;
  bool report_collapse = false;
  report_cmd->add_option("--timeline", report_timeline, "predicted timeline CSV")->required();
  report_cmd->add_option("--truth", report_truth, "ground-truth timeline CSV");
  report_cmd->add_option("--metrics", report_metrics, "metrics CSV to include");
  report_cmd->add_option("--bench", report_bench, "bench CSV to include");
  report_cmd->add_option("--taxonomy", report_taxonomy, "taxonomy file");
  report_cmd->add_option("--alpha", report_alpha, "significance level");
  report_cmd->add_flag("--collapse-runs", report_collapse, "count class changes only");
  report_cmd->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_session, ingest_taxonomy, ingest_annotations);
    if (*split_cmd) return cmd_split(split_frames, split_ratio, split_seed, split_out);
    if (*locate_cmd) return cmd_locate(locate_session, locate_out);
    if (*segment_cmd)
      return cmd_segment(segment_session, segment_out, segment_tau, segment_max_pixels,
                         segment_gaze_source, segment_resize, segment_render);
    if (*classify_cmd) return cmd_classify(classify_flags, classify_session, classify_out);
    if (*adapt_cmd)
      return cmd_adapt(adapt_embeddings, adapt_annotations, adapt_taxonomy, adapt_shots, adapt_alpha,
                       adapt_beta, adapt_out);
    if (*train_cmd) {
      if (!train_milestones.empty())
        for (const auto& tok : split(train_milestones, ',')) {
          auto m = parse_i64(tok);
          if (!m) throw InvalidInput("malformed milestone list");
          train_cfg.milestones.push_back(static_cast<int>(*m));
        }
      return cmd_train_probe(train_embeddings, train_annotations, train_taxonomy, train_multi, train_cfg,
                             train_out, train_loss_out);
    }
    if (*eval_cmd) {
      if (!eval_kappa.empty()) return cmd_kappa(eval_kappa[0], eval_kappa[1], eval_taxonomy);
      if (eval_scores.empty() || eval_truth.empty())
        throw InvalidInput("evaluate needs --scores and --truth (or --kappa)");
      return cmd_evaluate(eval_scores, eval_truth, eval_taxonomy, eval_multi, eval_threshold, eval_out);
    }
    if (*analyze_cmd)
      return cmd_analyze(analyze_timeline, analyze_truth, analyze_taxonomy, analyze_alpha,
                         analyze_collapse, analyze_out);
    if (*bench_cmd)
      return cmd_bench(bench_width, bench_height, bench_batches, bench_reps, bench_warmup, bench_frames,
                       bench_seed, bench_out);
    if (*synth_cmd)
      return cmd_synth(synth_frames, synth_width, synth_height, synth_seed, synth_noise, synth_no_dot,
                       synth_gaze_margin, synth_path, synth_taxonomy, synth_out);
    if (*report_cmd)
      return cmd_report(report_timeline, report_truth, report_metrics, report_bench, report_taxonomy,
                        report_alpha, report_collapse, report_out);
  } catch (const PipelineError& e) {
    log_line("error", -1, e.what());
    return kExitPipeline;
  } catch (const Error& e) {
    log_line("error", -1, e.what());
    return kExitData;
  } catch (const std::exception& e) {
    log_line("error", -1, e.what());
    return kExitData;
  }
  return kExitUsage;
}
