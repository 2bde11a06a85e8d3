#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gazekit/classify.hpp"
#include "gazekit/errors.hpp"
#include "gazekit/rng.hpp"
#include "test_util.hpp"

using namespace gazekit;

namespace {

Embedding random_embedding(int dim, Rng& rng) {
  return normalize_embedding(testutil::random_unit_vector(dim, rng));
}

ClassEmbeddings random_anchors(int K, int dim, Rng& rng, double temperature) {
  ClassEmbeddings ce;
  ce.temperature = temperature;
  for (int k = 0; k < K; ++k) {
    ce.names.push_back("class_" + std::to_string(k));
    ce.rows.push_back(random_embedding(dim, rng));
  }
  return ce;
}

// Dense high-precision recomputation of the adapter formula.
std::vector<double> adapter_oracle(const Embedding& e, const FewShotCache& cache,
                                   const ClassEmbeddings& ce) {
  const int K = ce.num_classes();
  std::vector<double> logits(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int j = 0; j < e.dim(); ++j) {
      dot += e.values[j] * ce.rows[k].values[j];
      na += e.values[j] * e.values[j];
      nb += ce.rows[k].values[j] * ce.rows[k].values[j];
    }
    logits[k] = dot / std::sqrt(na * nb) / ce.temperature;
  }
  for (std::size_t i = 0; i < cache.keys.size(); ++i) {
    double dot = 0.0;
    for (int j = 0; j < e.dim(); ++j) dot += e.values[j] * cache.keys[i].values[j];
    logits[static_cast<std::size_t>(cache.labels[i])] += cache.alpha * std::exp(-cache.beta * (1.0 - dot));
  }
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::vector<double> probs(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - m);
    sum += probs[k];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

}  // namespace

TEST_CASE("embed: deterministic, unit norm") {
  Rng rng(51);
  BuiltinExtractor extractor;
  Image img = testutil::random_image(32, 32, rng);
  auto e1 = extractor.extract(img, 0);
  auto e2 = extractor.extract(img, 1);
  CHECK(e1.values == e2.values);
  CHECK(e1.dim() == 88);
  double norm = 0.0;
  for (double v : e1.values) norm += v * v;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
}

TEST_CASE("embed: uniform red and uniform blue are far apart") {
  BuiltinExtractor extractor;
  Image red(32, 32, Rgb{255, 0, 0});
  Image blue(32, 32, Rgb{0, 0, 255});
  CHECK(cosine(extractor.extract(red, 0), extractor.extract(blue, 0)) < 0.9);
}

TEST_CASE("zero-shot: self-similarity dominates at low temperature") {
  // Orthogonal one-hot anchors; query equals anchor 2.
  ClassEmbeddings ce;
  ce.temperature = 0.01;
  const int K = 7, d = 16;
  for (int k = 0; k < K; ++k) {
    std::vector<double> v(d, 0.0);
    v[static_cast<std::size_t>(k)] = 1.0;
    ce.names.push_back("c" + std::to_string(k));
    ce.rows.push_back(normalize_embedding(std::move(v)));
  }
  auto scores = zero_shot_scores(ce.rows[2], ce);
  CHECK(predict_topk(scores, 1) == std::vector<int>{2});
  CHECK(scores.probs[2] > 0.99);
}

TEST_CASE("zero-shot: identical anchors give the uniform distribution") {
  Rng rng(52);
  Embedding anchor = random_embedding(12, rng);
  ClassEmbeddings ce;
  ce.temperature = 0.01;
  for (int k = 0; k < 5; ++k) {
    ce.names.push_back("c" + std::to_string(k));
    ce.rows.push_back(anchor);
  }
  auto scores = zero_shot_scores(random_embedding(12, rng), ce);
  for (double p : scores.probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("zero-shot: matches softmax-of-cosines oracle to 1e-12") {
  Rng rng(53);
  for (int iter = 0; iter < 50; ++iter) {
    auto ce = random_anchors(7, 16, rng, 0.01);
    auto e = random_embedding(16, rng);
    auto scores = zero_shot_scores(e, ce);
    FewShotCache empty;  // oracle with no cache term
    empty.num_classes = 7;
    auto expected = adapter_oracle(e, empty, ce);
    double sum = 0.0;
    for (int k = 0; k < 7; ++k) {
      CHECK(std::abs(scores.probs[k] - expected[k]) < 1e-12);
      CHECK(scores.probs[k] > 0.0);
      sum += scores.probs[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("zero-shot: argmax invariant to temperature") {
  Rng rng(54);
  for (int iter = 0; iter < 20; ++iter) {
    auto ce = random_anchors(7, 24, rng, 0.01);
    auto e = random_embedding(24, rng);
    auto top_low = predict_topk(zero_shot_scores(e, ce), 1);
    ce.temperature = 3.7;
    auto top_high = predict_topk(zero_shot_scores(e, ce), 1);
    CHECK(top_low == top_high);
  }
}

TEST_CASE("zero-shot: dimension mismatch") {
  Rng rng(55);
  auto ce = random_anchors(3, 8, rng, 0.01);
  CHECK_THROWS_AS(zero_shot_scores(random_embedding(9, rng), ce), ShapeError);
}

TEST_CASE("adapter: alpha = 0 reduces exactly to zero-shot") {
  Rng rng(56);
  for (int iter = 0; iter < 200; ++iter) {
    auto ce = random_anchors(7, 32, rng, 0.01);
    FewShotCache cache;
    cache.num_classes = 7;
    cache.alpha = 0.0;
    cache.beta = 5.5;
    int n = 1 + static_cast<int>(rng.next_below(16));
    for (int i = 0; i < n; ++i)
      cache.add(random_embedding(32, rng), static_cast<int>(rng.next_below(7)));
    auto e = random_embedding(32, rng);
    auto a = adapter_scores(e, cache, ce);
    auto z = zero_shot_scores(e, ce);
    for (int k = 0; k < 7; ++k) CHECK(std::abs(a.probs[k] - z.probs[k]) <= 1e-12);
  }
}

TEST_CASE("adapter: cache containing the query wins with large alpha") {
  Rng rng(57);
  for (int iter = 0; iter < 50; ++iter) {
    auto ce = random_anchors(7, 32, rng, 1.0);
    auto e = random_embedding(32, rng);
    int label = static_cast<int>(rng.next_below(7));
    FewShotCache cache;
    cache.num_classes = 7;
    cache.alpha = 10.0;
    cache.beta = 5.5;
    cache.add(e, label);
    for (int i = 0; i < 6; ++i)
      cache.add(random_embedding(32, rng), static_cast<int>(rng.next_below(7)));
    auto scores = adapter_scores(e, cache, ce);
    CHECK(predict_topk(scores, 1).front() == label);
  }
}

TEST_CASE("adapter: matches dense recomputation oracle to 1e-10") {
  Rng rng(58);
  for (int iter = 0; iter < 50; ++iter) {
    auto ce = random_anchors(7, 16, rng, 0.05);
    FewShotCache cache;
    cache.num_classes = 7;
    cache.alpha = 0.25 + 3.0 * rng.next_double();
    cache.beta = 1.0 + 8.0 * rng.next_double();
    for (int i = 0; i < 16; ++i)
      cache.add(random_embedding(16, rng), static_cast<int>(rng.next_below(7)));
    auto e = random_embedding(16, rng);
    auto scores = adapter_scores(e, cache, ce);
    auto expected = adapter_oracle(e, cache, ce);
    for (int k = 0; k < 7; ++k) CHECK(std::abs(scores.probs[k] - expected[k]) < 1e-10);
  }
}

TEST_CASE("adapter: empty cache and per-class cap") {
  Rng rng(59);
  auto ce = random_anchors(3, 8, rng, 0.01);
  FewShotCache cache;
  cache.num_classes = 3;
  CHECK_THROWS_AS(adapter_scores(random_embedding(8, rng), cache, ce), EmptyCache);
  for (int i = 0; i < FewShotCache::kMaxPerClass; ++i) cache.add(random_embedding(8, rng), 1);
  CHECK_THROWS_AS(cache.add(random_embedding(8, rng), 1), InvalidInput);
  cache.add(random_embedding(8, rng), 0);  // other classes unaffected
}

TEST_CASE("fuse: idempotent and symmetric") {
  ClassScores a{{1.0, 0.0}, ScoreKind::single_label};
  ClassScores b{{0.0, 1.0}, ScoreKind::single_label};
  auto f = fuse_scores(a, b);
  CHECK(f.probs[0] == doctest::Approx(0.5));
  CHECK(f.probs[1] == doctest::Approx(0.5));
  auto same = fuse_scores(a, a);
  CHECK(same.probs[0] == doctest::Approx(1.0));
}

TEST_CASE("fuse: commutative on random pairs, output normalized") {
  Rng rng(60);
  for (int iter = 0; iter < 40; ++iter) {
    auto ce = random_anchors(7, 8, rng, 0.5);
    auto a = zero_shot_scores(random_embedding(8, rng), ce);
    auto b = zero_shot_scores(random_embedding(8, rng), ce);
    for (auto mode : {FusionMode::mean_prob, FusionMode::mean_logit}) {
      auto ab = fuse_scores(a, b, mode);
      auto ba = fuse_scores(b, a, mode);
      double sum = 0.0;
      for (int k = 0; k < 7; ++k) {
        CHECK(ab.probs[k] == doctest::Approx(ba.probs[k]).epsilon(1e-12));
        CHECK(ab.probs[k] >= 0.0);
        sum += ab.probs[k];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("fuse: multi-label mean stays in [0,1]; kind mismatch rejected") {
  ClassScores a{{0.2, 0.9}, ScoreKind::multi_label};
  ClassScores b{{0.4, 0.1}, ScoreKind::multi_label};
  auto f = fuse_scores(a, b);
  CHECK(f.probs[0] == doctest::Approx(0.3));
  CHECK(f.probs[1] == doctest::Approx(0.5));
  ClassScores single{{0.5, 0.5}, ScoreKind::single_label};
  CHECK_THROWS_AS(fuse_scores(a, single), KindError);
  ClassScores shorter{{1.0}, ScoreKind::multi_label};
  CHECK_THROWS_AS(fuse_scores(a, shorter), ShapeError);
}

TEST_CASE("predict_topk: ordering, ties, nesting, range") {
  ClassScores s{{0.1, 0.7, 0.2}, ScoreKind::single_label};
  CHECK(predict_topk(s, 1) == std::vector<int>{1});
  CHECK(predict_topk(s, 3) == std::vector<int>{1, 2, 0});

  ClassScores uniform{{0.25, 0.25, 0.25, 0.25}, ScoreKind::single_label};
  CHECK(predict_topk(uniform, 3) == std::vector<int>{0, 1, 2});

  Rng rng(61);
  for (int iter = 0; iter < 20; ++iter) {
    auto ce = random_anchors(7, 8, rng, 0.5);
    auto scores = zero_shot_scores(random_embedding(8, rng), ce);
    auto top1 = predict_topk(scores, 1);
    auto top3 = predict_topk(scores, 3);
    CHECK(std::find(top3.begin(), top3.end(), top1.front()) != top3.end());
  }
  CHECK_THROWS_AS(predict_topk(s, 0), RangeError);
  CHECK_THROWS_AS(predict_topk(s, 4), RangeError);
}

TEST_CASE("embedding store: save/load round-trip and missing lookup") {
  Rng rng(62);
  auto dir = std::filesystem::temp_directory_path() / "gazekit_store_test";
  std::filesystem::create_directories(dir);

  EmbeddingStore store;
  for (int i = 0; i < 5; ++i) store.insert(i * 10, random_embedding(12, rng));
  store.save(dir / "emb.csv");
  auto loaded = EmbeddingStore::load(dir / "emb.csv");
  CHECK(loaded.size() == 5);
  CHECK(loaded.dim() == 12);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 12; ++j)
      CHECK(loaded.lookup(i * 10).values[j] == doctest::Approx(store.lookup(i * 10).values[j]).epsilon(1e-12));
  CHECK_THROWS_AS(loaded.lookup(7), LookupError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("class embeddings: seeded generation deterministic; file round-trip") {
  auto taxonomy = ClassTaxonomy::default_gaze_targets();
  auto a = ClassEmbeddings::random_unit(taxonomy, 88, 42);
  auto b = ClassEmbeddings::random_unit(taxonomy, 88, 42);
  CHECK(a.rows == b.rows);
  auto c = ClassEmbeddings::random_unit(taxonomy, 88, 43);
  CHECK(a.rows != c.rows);

  auto dir = std::filesystem::temp_directory_path() / "gazekit_ce_test";
  std::filesystem::create_directories(dir);
  a.save(dir / "ce.csv");
  auto loaded = ClassEmbeddings::load(dir / "ce.csv");
  CHECK(loaded.names == a.names);
  REQUIRE(loaded.num_classes() == a.num_classes());
  for (int k = 0; k < a.num_classes(); ++k)
    for (int j = 0; j < a.dim(); ++j)
      CHECK(loaded.rows[k].values[j] == doctest::Approx(a.rows[k].values[j]).epsilon(1e-12));
  std::filesystem::remove_all(dir);
}

TEST_CASE("cache file: stable binary round-trip") {
  Rng rng(63);
  auto dir = std::filesystem::temp_directory_path() / "gazekit_cache_test";
  std::filesystem::create_directories(dir);

  FewShotCache cache;
  cache.num_classes = 7;
  cache.alpha = 1.25;
  cache.beta = 4.75;
  for (int i = 0; i < 20; ++i)
    cache.add(random_embedding(16, rng), static_cast<int>(rng.next_below(7)));

  cache.save(dir / "a.bin");
  auto loaded = FewShotCache::load(dir / "a.bin");
  CHECK(loaded.num_classes == 7);
  CHECK(loaded.alpha == 1.25);
  CHECK(loaded.beta == 4.75);
  CHECK(loaded.labels == cache.labels);
  loaded.save(dir / "b.bin");

  auto bytes = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(bytes(dir / "a.bin") == bytes(dir / "b.bin"));
  std::filesystem::remove_all(dir);
}
