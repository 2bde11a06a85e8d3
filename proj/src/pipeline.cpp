#include "gazekit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include "gazekit/errors.hpp"
#include "gazekit/image_io.hpp"
#include "gazekit/locate.hpp"
#include "gazekit/queue.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

DirectoryFrames::DirectoryFrames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext != ".ppm" && ext != ".bmp") continue;
    auto stem = entry.path().stem().string();
    auto index = parse_i64(stem);
    if (!index || *index < 0) continue;  // non-numbered files are not frames
    entries_.emplace_back(*index, entry.path());
  }
  std::sort(entries_.begin(), entries_.end());
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].first == entries_[i - 1].first)
      throw InvalidInput("duplicate frame index in " + dir.string());
  if (entries_.empty()) throw EmptyInput("no frames found in " + dir.string());
}

Image DirectoryFrames::frame(std::size_t pos) const { return load_image(entries_[pos].second); }

Session load_session_dir(const std::filesystem::path& dir, std::string session_id) {
  Session session;
  session.session_id = session_id.empty() ? dir.filename().string() : std::move(session_id);
  session.frames = std::make_shared<DirectoryFrames>(dir / "frames");

  auto gaze_path = dir / "gaze.csv";
  if (std::filesystem::exists(gaze_path)) {
    std::ifstream in(gaze_path);
    if (!in) throw IoError("cannot open gaze log: " + gaze_path.string());
    session.gaze = parse_gaze_log(in);
  }
  return session;
}

namespace {

std::shared_ptr<FeatureExtractor> make_extractor(const std::string& store_path) {
  if (store_path.empty()) return std::make_shared<BuiltinExtractor>();
  return std::make_shared<StoredExtractor>(EmbeddingStore::load(store_path));
}

}  // namespace

PipelineComponents load_components(const PipelineConfig& cfg, const std::string& video_id) {
  PipelineComponents c;
  c.taxonomy = cfg.taxonomy_path.empty() ? ClassTaxonomy::default_gaze_targets()
                                         : ClassTaxonomy::load(cfg.taxonomy_path);

  c.crop_extractor = make_extractor(cfg.crop_embeddings_path);
  c.mask_extractor = cfg.use_mask ? make_extractor(cfg.mask_embeddings_path) : nullptr;

  if (cfg.class_embeddings_path.empty()) {
    c.anchors = ClassEmbeddings::random_unit(c.taxonomy, c.crop_extractor->dim(), cfg.seed, cfg.temperature);
  } else {
    c.anchors = ClassEmbeddings::load(cfg.class_embeddings_path, cfg.temperature);
    if (c.anchors.num_classes() != c.taxonomy.size())
      throw ShapeError("class embedding rows do not match taxonomy size");
  }

  // Absent model paths leave the slot empty; callers may inject components
  // they built in memory. run_pipeline checks completeness.
  if (cfg.classifier == ClassifierKind::adapter && !cfg.cache_path.empty()) {
    c.crop_cache = FewShotCache::load(cfg.cache_path);
    c.crop_cache->alpha = cfg.alpha;
    c.crop_cache->beta = cfg.beta;
    if (cfg.use_mask) {
      c.mask_cache = cfg.mask_cache_path.empty() ? c.crop_cache
                                                 : FewShotCache::load(cfg.mask_cache_path);
      c.mask_cache->alpha = cfg.alpha;
      c.mask_cache->beta = cfg.beta;
    }
  } else if (cfg.classifier == ClassifierKind::probe && !cfg.probe_path.empty()) {
    c.crop_probe = LinearProbe::load(cfg.probe_path);
    if (cfg.use_mask)
      c.mask_probe = cfg.mask_probe_path.empty() ? c.crop_probe : LinearProbe::load(cfg.mask_probe_path);
  }

  if (cfg.use_mask) {
    if (cfg.segmenter == SegmenterKind::region_grow) {
      c.segmenter = std::make_shared<RegionGrowProvider>(RegionGrowConfig{cfg.tau, cfg.max_pixels});
    } else {
      if (cfg.masks_dir.empty()) throw InvalidInput("external segmenter needs masks_dir");
      c.segmenter = std::make_shared<ExternalMaskProvider>(cfg.masks_dir, video_id);
    }
  }
  return c;
}

namespace {

struct SourceItem {
  std::size_t pos = 0;
  std::int64_t frame_index = 0;
  bool valid = false;
  PixelPoint gaze;
  Image frame;
};

struct RenderedItem {
  std::size_t pos = 0;
  std::int64_t frame_index = 0;
  FrameStatus status = FrameStatus::invalid;
  std::string error;
  Image crop;
  Image masked;
};

class FrameWorker {
 public:
  FrameWorker(const PipelineConfig& cfg, const PipelineComponents& c) : cfg_(cfg), c_(c) {}

  // locate + crop + mask + render; classification-free vision work.
  RenderedItem render(SourceItem item) const {
    RenderedItem out;
    out.pos = item.pos;
    out.frame_index = item.frame_index;
    if (!item.valid) {
      out.status = FrameStatus::invalid;
      return out;
    }
    try {
      CropSpec spec{cfg_.crop_size, cfg_.resize_to};
      out.crop = resize_bilinear(crop_square(item.frame, item.gaze, spec), cfg_.resize_to);
      if (cfg_.use_mask) {
        Mask mask = c_.segmenter->mask_for(item.frame, item.frame_index, item.gaze);
        out.masked = render_masked(item.frame, mask, cfg_.resize_to);
      }
      out.status = FrameStatus::ok;
    } catch (const std::exception& e) {
      out.status = FrameStatus::failed;
      out.error = e.what();
    }
    return out;
  }

  ClassScores classify_one(const Embedding& e, const std::optional<FewShotCache>& cache,
                           const std::optional<LinearProbe>& probe) const {
    switch (cfg_.classifier) {
      case ClassifierKind::zero_shot:
        return zero_shot_scores(e, c_.anchors);
      case ClassifierKind::adapter:
        if (!cache) throw EmptyCache("few-shot cache not loaded");
        return adapter_scores(e, *cache, c_.anchors);
      case ClassifierKind::probe:
        if (!probe) throw InvalidInput("probe not loaded");
        return probe_scores(e, *probe);
    }
    throw InvalidInput("unknown classifier kind");
  }

  FrameOutcome classify(RenderedItem item) const {
    FrameOutcome out;
    out.frame_index = item.frame_index;
    out.status = item.status;
    out.error = std::move(item.error);
    if (item.status != FrameStatus::ok) return out;
    try {
      Embedding e_crop = c_.crop_extractor->extract(item.crop, item.frame_index);
      ClassScores scores = classify_one(e_crop, c_.crop_cache, c_.crop_probe);
      if (cfg_.use_mask) {
        Embedding e_mask = c_.mask_extractor->extract(item.masked, item.frame_index);
        ClassScores mask_scores = classify_one(e_mask, c_.mask_cache, c_.mask_probe);
        scores = fuse_scores(scores, mask_scores, cfg_.fusion);
      }
      out.label = predict_topk(scores, 1).front();
      out.scores = std::move(scores);
      out.status = FrameStatus::ok;
    } catch (const std::exception& e) {
      out.status = FrameStatus::failed;
      out.error = e.what();
    }
    return out;
  }

 private:
  const PipelineConfig& cfg_;
  const PipelineComponents& c_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineComponents& components,
                            const Session& session) {
  if (!session.frames || session.frames->size() == 0) throw EmptyInput("session has no frames");
  if (cfg.crop_size < 2) throw InvalidSize("crop size must be at least 2");
  if (cfg.use_mask && !components.segmenter) throw InvalidInput("mask input enabled without a segmenter");
  if (cfg.gaze_source == GazeSource::log && session.gaze.empty())
    throw InvalidInput("gaze log required unless the dot detector is selected");
  if (cfg.classifier == ClassifierKind::adapter &&
      (!components.crop_cache || (cfg.use_mask && !components.mask_cache)))
    throw InvalidInput("adapter classifier needs a few-shot cache (file or in-memory)");
  if (cfg.classifier == ClassifierKind::probe &&
      (!components.crop_probe || (cfg.use_mask && !components.mask_probe)))
    throw InvalidInput("probe classifier needs a trained probe (file or in-memory)");

  const std::size_t n = session.frames->size();
  std::map<std::int64_t, const GazeRecord*> gaze_by_frame;
  for (const auto& g : session.gaze) gaze_by_frame[g.frame_index] = &g;

  FrameWorker worker(cfg, components);

  auto make_source_item = [&](std::size_t pos) {
    SourceItem item;
    item.pos = pos;
    item.frame_index = session.frames->frame_index(pos);
    item.frame = session.frames->frame(pos);
    if (cfg.gaze_source == GazeSource::detector) {
      item.gaze = find_gaze_dot(item.frame);
      item.valid = true;
    } else {
      auto it = gaze_by_frame.find(item.frame_index);
      if (it != gaze_by_frame.end() && it->second->valid &&
          item.frame.contains(it->second->x, it->second->y)) {
        item.gaze = PixelPoint{it->second->x, it->second->y};
        item.valid = true;
      }
    }
    return item;
  };

  const double replay_fps = 25.0;
  auto pace = [&](std::chrono::steady_clock::time_point start, std::size_t pos) {
    if (cfg.paced)
      std::this_thread::sleep_until(
          start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(static_cast<double>(pos) / replay_fps)));
  };

  std::vector<FrameOutcome> outcomes(n);
  if (!cfg.streaming) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t pos = 0; pos < n; ++pos) {
      pace(start, pos);
      outcomes[pos] = worker.classify(worker.render(make_source_item(pos)));
    }
  } else {
    const std::size_t capacity = std::min<std::size_t>(cfg.queue_capacity ? cfg.queue_capacity : 64, 64);
    BoundedQueue<SourceItem> q_source(capacity);
    BoundedQueue<RenderedItem> q_rendered(capacity);
    BoundedQueue<FrameOutcome> q_out(capacity);

    const auto start = std::chrono::steady_clock::now();
    std::thread producer([&] {
      for (std::size_t pos = 0; pos < n; ++pos) {
        pace(start, pos);
        q_source.push(make_source_item(pos));
      }
      q_source.close();
    });
    std::thread renderer([&] {
      while (auto item = q_source.pop()) q_rendered.push(worker.render(std::move(*item)));
      q_rendered.close();
    });
    std::thread classifier([&] {
      while (auto item = q_rendered.pop()) q_out.push(worker.classify(std::move(*item)));
      q_out.close();
    });

    std::size_t received = 0;
    while (auto out = q_out.pop()) outcomes[received++] = std::move(*out);
    producer.join();
    renderer.join();
    classifier.join();
    if (received != n) throw PipelineError("streaming pipeline lost frames");
  }

  PipelineResult result;
  result.timeline.session_id = session.session_id;
  result.timeline.fps = 25.0;
  result.timeline.labels.assign(n, std::nullopt);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto& out = outcomes[pos];
    if (out.status == FrameStatus::ok) {
      result.timeline.labels[pos] = out.label;
      ++result.produced;
    } else {
      ++result.skipped;
      if (cfg.log)
        cfg.log(out.status == FrameStatus::invalid ? "info" : "error", out.frame_index,
                out.status == FrameStatus::invalid ? "no valid gaze estimate" : out.error);
    }
  }
  result.outcomes = std::move(outcomes);

  if (result.skipped * 2 > n)
    throw PipelineError("more than half the frames produced no label (" +
                        std::to_string(result.skipped) + " of " + std::to_string(n) + ")");
  return result;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const Session& session) {
  return run_pipeline(cfg, load_components(cfg, session.session_id), session);
}

void write_scores_csv(std::ostream& out, const PipelineResult& result, const ClassTaxonomy& taxonomy) {
  out << "frame,status";
  for (int k = 0; k < taxonomy.size(); ++k) out << ',' << taxonomy.name(k);
  out << '\n';
  for (const auto& o : result.outcomes) {
    out << o.frame_index << ',';
    switch (o.status) {
      case FrameStatus::ok: out << "ok"; break;
      case FrameStatus::invalid: out << "invalid"; break;
      case FrameStatus::failed: out << "failed"; break;
    }
    if (o.scores) {
      for (double p : o.scores->probs) out << ',' << format_double(p);
    } else {
      for (int k = 0; k < taxonomy.size(); ++k) out << ',';
    }
    out << '\n';
  }
}

}  // namespace gazekit
