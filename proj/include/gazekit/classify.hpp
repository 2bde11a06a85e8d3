#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gazekit/image.hpp"
#include "gazekit/ingest.hpp"

namespace gazekit {

// Unit-L2-norm feature vector.
struct Embedding {
  std::vector<double> values;
  int dim() const { return static_cast<int>(values.size()); }
  bool operator==(const Embedding&) const = default;
};

// L2-normalizes in place; throws InvalidInput on an all-zero vector.
Embedding normalize_embedding(std::vector<double> values);

// Dot product; equals cosine similarity for unit-norm inputs.
double cosine(const Embedding& a, const Embedding& b);

// Image -> embedding seam. The pipeline never assumes a particular encoder;
// embeddings can come from the built-in extractor or from files produced by
// an external model.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int dim() const = 0;
  virtual Embedding extract(const Image& img, std::int64_t frame_index) const = 0;
};

// 3x8-bin color histogram (proportions) concatenated with an 8x8 grayscale
// thumbnail, L2-normalized; d = 88. Deterministic and encoder-free.
class BuiltinExtractor : public FeatureExtractor {
 public:
  int dim() const override { return 88; }
  Embedding extract(const Image& img, std::int64_t frame_index) const override;
};

// Precomputed per-frame embeddings: one line per frame,
// `frame_id,v0,...,v{d-1}`. Vectors are normalized on load.
class EmbeddingStore {
 public:
  static EmbeddingStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void insert(std::int64_t frame_id, Embedding e);
  const Embedding& lookup(std::int64_t frame_id) const;  // LookupError when absent
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

 private:
  int dim_ = 0;
  std::map<std::int64_t, Embedding> entries_;
};

class StoredExtractor : public FeatureExtractor {
 public:
  explicit StoredExtractor(EmbeddingStore store) : store_(std::move(store)) {}
  int dim() const override { return store_.dim(); }
  Embedding extract(const Image&, std::int64_t frame_index) const override {
    return store_.lookup(frame_index);
  }

 private:
  EmbeddingStore store_;
};

// One unit-norm anchor embedding per taxonomy class plus the softmax
// temperature applied to cosine similarities.
struct ClassEmbeddings {
  std::vector<std::string> names;
  std::vector<Embedding> rows;
  double temperature = 0.01;

  int num_classes() const { return static_cast<int>(rows.size()); }
  int dim() const { return rows.empty() ? 0 : rows.front().dim(); }

  // Deterministic random unit rows; stand-in anchors for synthetic runs.
  static ClassEmbeddings random_unit(const ClassTaxonomy& taxonomy, int dim, std::uint64_t seed,
                                     double temperature = 0.01);
  // CSV rows `name,v0,...,v{d-1}`.
  static ClassEmbeddings load(const std::filesystem::path& path, double temperature = 0.01);
  void save(const std::filesystem::path& path) const;
};

enum class ScoreKind { single_label, multi_label };

// Per-class scores; single_label rows form a probability distribution,
// multi_label entries are independent probabilities.
struct ClassScores {
  std::vector<double> probs;
  ScoreKind kind = ScoreKind::single_label;
  int num_classes() const { return static_cast<int>(probs.size()); }
};

// softmax(cos(e, anchor_k) / temperature)
ClassScores zero_shot_scores(const Embedding& e, const ClassEmbeddings& anchors);

// Few-shot correction cache: up to 16 labeled embeddings per class. Scores
// add alpha-weighted affinities exp(-beta*(1-cos)) onto the zero-shot logits.
struct FewShotCache {
  std::vector<Embedding> keys;
  std::vector<int> labels;  // parallel to keys
  int num_classes = 0;
  double alpha = 1.0;
  double beta = 5.5;

  static constexpr int kMaxPerClass = 16;

  std::size_t size() const { return keys.size(); }
  void add(Embedding key, int label);  // InvalidInput past the per-class cap

  static FewShotCache load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

ClassScores adapter_scores(const Embedding& e, const FewShotCache& cache, const ClassEmbeddings& anchors);

enum class FusionMode { mean_prob, mean_logit };

// Element-wise mean of two score vectors of the same kind; single-label
// output is renormalized. mean_logit averages in log/logit space instead.
ClassScores fuse_scores(const ClassScores& a, const ClassScores& b, FusionMode mode = FusionMode::mean_prob);

// k class indices by descending probability, ties by ascending index.
std::vector<int> predict_topk(const ClassScores& scores, int k);

}  // namespace gazekit
