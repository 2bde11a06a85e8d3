#include "gazekit/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gazekit/errors.hpp"
#include "gazekit/locate.hpp"
#include "gazekit/rng.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

namespace {

std::vector<double> softmax(std::span<const double> logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated binary file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32_le(std::ostream& out, float v) {
  write_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

float read_f32_le(std::istream& in) {
  return std::bit_cast<float>(read_u32_le(in));
}

void write_f64_le(std::ostream& out, double v) {
  auto u = std::bit_cast<std::uint64_t>(v);
  write_u32_le(out, static_cast<std::uint32_t>(u & 0xffffffffu));
  write_u32_le(out, static_cast<std::uint32_t>(u >> 32));
}

double read_f64_le(std::istream& in) {
  std::uint64_t lo = read_u32_le(in);
  std::uint64_t hi = read_u32_le(in);
  return std::bit_cast<double>(lo | (hi << 32));
}

void check_magic(std::istream& in, const char* magic) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0)
    throw FormatError(std::string("bad magic, expected ") + magic);
}

}  // namespace

Embedding normalize_embedding(std::vector<double> values) {
  double norm2 = 0.0;
  for (double v : values) norm2 += v * v;
  if (norm2 <= 0.0 || !std::isfinite(norm2)) throw InvalidInput("cannot normalize zero or non-finite vector");
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& v : values) v *= inv;
  return Embedding{std::move(values)};
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw ShapeError("embedding dimensions differ");
  double dot = 0.0;
  for (int i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

Embedding BuiltinExtractor::extract(const Image& img, std::int64_t) const {
  if (img.empty()) throw InvalidInput("cannot embed an empty image");
  std::vector<double> v(88, 0.0);

  const std::uint8_t* p = img.data().data();
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  for (std::size_t i = 0; i < n; ++i, p += 3) {
    v[p[0] / 32] += 1.0;
    v[8 + p[1] / 32] += 1.0;
    v[16 + p[2] / 32] += 1.0;
  }
  for (int i = 0; i < 24; ++i) v[i] /= static_cast<double>(n);

  Image thumb = resize_bilinear(img, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      Rgb c = thumb.at(x, y);
      v[24 + y * 8 + x] = (0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0;
    }
  return normalize_embedding(std::move(v));
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  EmbeddingStore store;
  std::string line;
  std::int64_t row = 0;
  while (get_line(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() < 2) throw FormatError("expected frame id and values", row);
    auto id = parse_i64(fields[0]);
    if (!id) throw FormatError("malformed frame id", row);
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = parse_double(fields[i]);
      if (!v) throw FormatError("malformed embedding value", row);
      values.push_back(*v);
    }
    if (store.dim_ == 0) store.dim_ = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != store.dim_)
      throw FormatError("inconsistent embedding dimension", row);
    store.entries_[*id] = normalize_embedding(std::move(values));
  }
  if (store.entries_.empty()) throw EmptyInput("embedding file has no records: " + path.string());
  return store;
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create embedding file: " + path.string());
  for (const auto& [id, e] : entries_) {
    out << id;
    for (double v : e.values) out << ',' << format_double(v);
    out << '\n';
  }
}

void EmbeddingStore::insert(std::int64_t frame_id, Embedding e) {
  if (dim_ == 0) dim_ = e.dim();
  if (e.dim() != dim_) throw ShapeError("inconsistent embedding dimension");
  entries_[frame_id] = std::move(e);
}

const Embedding& EmbeddingStore::lookup(std::int64_t frame_id) const {
  auto it = entries_.find(frame_id);
  if (it == entries_.end())
    throw LookupError("no precomputed embedding for frame " + std::to_string(frame_id));
  return it->second;
}

ClassEmbeddings ClassEmbeddings::random_unit(const ClassTaxonomy& taxonomy, int dim, std::uint64_t seed,
                                             double temperature) {
  if (dim < 1) throw InvalidSize("embedding dimension must be positive");
  ClassEmbeddings ce;
  ce.temperature = temperature;
  Rng rng(Rng::mix(seed, 0x617263686f72ULL));
  for (int k = 0; k < taxonomy.size(); ++k) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = rng.normal();
    ce.names.push_back(taxonomy.name(k));
    ce.rows.push_back(normalize_embedding(std::move(v)));
  }
  return ce;
}

ClassEmbeddings ClassEmbeddings::load(const std::filesystem::path& path, double temperature) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class embedding file: " + path.string());
  ClassEmbeddings ce;
  ce.temperature = temperature;
  std::string line;
  std::int64_t row = 0;
  while (get_line(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() < 2) throw FormatError("expected class name and values", row);
    std::vector<double> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = parse_double(fields[i]);
      if (!v) throw FormatError("malformed embedding value", row);
      values.push_back(*v);
    }
    if (!ce.rows.empty() && static_cast<int>(values.size()) != ce.dim())
      throw FormatError("inconsistent embedding dimension", row);
    ce.names.push_back(fields[0]);
    ce.rows.push_back(normalize_embedding(std::move(values)));
  }
  if (ce.rows.empty()) throw EmptyInput("class embedding file has no rows: " + path.string());
  return ce;
}

void ClassEmbeddings::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create class embedding file: " + path.string());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out << names[k];
    for (double v : rows[k].values) out << ',' << format_double(v);
    out << '\n';
  }
}

ClassScores zero_shot_scores(const Embedding& e, const ClassEmbeddings& anchors) {
  if (anchors.num_classes() == 0) throw EmptyInput("no class embeddings");
  if (e.dim() != anchors.dim()) throw ShapeError("embedding dimension does not match class embeddings");
  if (!(anchors.temperature > 0.0)) throw InvalidInput("temperature must be positive");
  std::vector<double> logits(static_cast<std::size_t>(anchors.num_classes()));
  for (int k = 0; k < anchors.num_classes(); ++k)
    logits[static_cast<std::size_t>(k)] = cosine(e, anchors.rows[static_cast<std::size_t>(k)]) / anchors.temperature;
  return ClassScores{softmax(logits), ScoreKind::single_label};
}

void FewShotCache::add(Embedding key, int label) {
  if (num_classes <= 0) throw InvalidInput("cache num_classes not set");
  if (label < 0 || label >= num_classes) throw RangeError("cache label out of range");
  int per_class = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) ++per_class;
  if (per_class >= kMaxPerClass) throw InvalidInput("cache already holds 16 keys for this class");
  if (!keys.empty() && key.dim() != keys.front().dim()) throw ShapeError("inconsistent key dimension");
  keys.push_back(std::move(key));
  labels.push_back(label);
}

FewShotCache FewShotCache::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cache file: " + path.string());
  check_magic(in, "GZKCACH1");
  std::uint32_t version = read_u32_le(in);
  if (version != 1) throw FormatError("unsupported cache version");
  std::uint32_t d = read_u32_le(in);
  std::uint32_t K = read_u32_le(in);
  std::uint32_t N = read_u32_le(in);
  FewShotCache cache;
  cache.num_classes = static_cast<int>(K);
  cache.alpha = read_f64_le(in);
  cache.beta = read_f64_le(in);
  for (std::uint32_t i = 0; i < N; ++i) {
    std::vector<double> v(d);
    for (auto& x : v) {
      x = read_f32_le(in);
      if (!std::isfinite(x)) throw FormatError("non-finite cache key value");
    }
    // Keys were unit-norm before float32 quantization; re-normalizing here
    // would break byte-stable round-trips.
    cache.keys.push_back(Embedding{std::move(v)});
  }
  for (std::uint32_t i = 0; i < N; ++i) {
    int label = -1;
    for (std::uint32_t k = 0; k < K; ++k) {
      float x = read_f32_le(in);
      if (x == 1.0f) {
        if (label >= 0) throw FormatError("cache value row is not one-hot");
        label = static_cast<int>(k);
      } else if (x != 0.0f) {
        throw FormatError("cache value row is not one-hot");
      }
    }
    if (label < 0) throw FormatError("cache value row is not one-hot");
    cache.labels.push_back(label);
  }
  return cache;
}

void FewShotCache::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create cache file: " + path.string());
  out.write("GZKCACH1", 8);
  write_u32_le(out, 1);
  std::uint32_t d = keys.empty() ? 0 : static_cast<std::uint32_t>(keys.front().dim());
  write_u32_le(out, d);
  write_u32_le(out, static_cast<std::uint32_t>(num_classes));
  write_u32_le(out, static_cast<std::uint32_t>(keys.size()));
  write_f64_le(out, alpha);
  write_f64_le(out, beta);
  for (const auto& key : keys)
    for (double v : key.values) write_f32_le(out, static_cast<float>(v));
  for (int label : labels)
    for (int k = 0; k < num_classes; ++k) write_f32_le(out, k == label ? 1.0f : 0.0f);
  if (!out) throw IoError("failed writing cache file: " + path.string());
}

ClassScores adapter_scores(const Embedding& e, const FewShotCache& cache, const ClassEmbeddings& anchors) {
  if (cache.keys.empty()) throw EmptyCache("few-shot cache is empty");
  if (cache.num_classes != anchors.num_classes())
    throw ShapeError("cache and class embeddings disagree on class count");
  if (e.dim() != anchors.dim() || e.dim() != cache.keys.front().dim())
    throw ShapeError("embedding dimension mismatch");
  if (!(cache.beta > 0.0) || cache.alpha < 0.0) throw InvalidInput("alpha must be >= 0 and beta > 0");

  std::vector<double> logits(static_cast<std::size_t>(anchors.num_classes()));
  for (int k = 0; k < anchors.num_classes(); ++k)
    logits[static_cast<std::size_t>(k)] = cosine(e, anchors.rows[static_cast<std::size_t>(k)]) / anchors.temperature;
  if (cache.alpha != 0.0) {
    for (std::size_t i = 0; i < cache.keys.size(); ++i) {
      double affinity = std::exp(-cache.beta * (1.0 - cosine(e, cache.keys[i])));
      logits[static_cast<std::size_t>(cache.labels[i])] += cache.alpha * affinity;
    }
  }
  return ClassScores{softmax(logits), ScoreKind::single_label};
}

ClassScores fuse_scores(const ClassScores& a, const ClassScores& b, FusionMode mode) {
  if (a.kind != b.kind) throw KindError("cannot fuse scores of different kinds");
  if (a.num_classes() != b.num_classes()) throw ShapeError("score vectors differ in length");
  ClassScores out;
  out.kind = a.kind;
  out.probs.resize(a.probs.size());

  if (mode == FusionMode::mean_prob) {
    for (std::size_t i = 0; i < a.probs.size(); ++i) out.probs[i] = 0.5 * (a.probs[i] + b.probs[i]);
  } else if (a.kind == ScoreKind::single_label) {
    // Geometric mean == softmax of averaged logits up to normalization.
    for (std::size_t i = 0; i < a.probs.size(); ++i) out.probs[i] = std::sqrt(a.probs[i] * b.probs[i]);
  } else {
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
      double pa = a.probs[i], pb = b.probs[i];
      if (pa <= 0.0 || pb <= 0.0) {
        out.probs[i] = 0.0;
      } else if (pa >= 1.0 || pb >= 1.0) {
        out.probs[i] = 1.0;
      } else {
        double z = 0.5 * (std::log(pa / (1.0 - pa)) + std::log(pb / (1.0 - pb)));
        out.probs[i] = 1.0 / (1.0 + std::exp(-z));
      }
    }
  }

  if (out.kind == ScoreKind::single_label) {
    double sum = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
    if (sum <= 0.0) throw InvalidInput("fused distribution sums to zero");
    for (auto& v : out.probs) v /= sum;
  }
  return out;
}

std::vector<int> predict_topk(const ClassScores& scores, int k) {
  const int K = scores.num_classes();
  if (k < 1 || k > K) throw RangeError("k must lie in [1, K]");
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores.probs[static_cast<std::size_t>(a)] > scores.probs[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

}  // namespace gazekit
