#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gazekit/errors.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/rng.hpp"
#include "test_util.hpp"

using namespace gazekit;

namespace {

EvalRecord make_record(std::vector<double> probs, std::vector<int> truth, ScoreKind kind) {
  return EvalRecord{ClassScores{std::move(probs), kind}, std::move(truth)};
}

std::vector<EvalRecord> random_records(std::size_t n, int K, ScoreKind kind, Rng& rng) {
  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> probs(static_cast<std::size_t>(K));
    double sum = 0.0;
    for (auto& p : probs) {
      p = rng.next_double();
      sum += p;
    }
    if (kind == ScoreKind::single_label)
      for (auto& p : probs) p /= sum;
    std::vector<int> truth;
    if (kind == ScoreKind::single_label) {
      truth.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(K))));
    } else {
      for (int k = 0; k < K; ++k)
        if (rng.next_double() < 0.35) truth.push_back(k);
      if (truth.empty()) truth.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(K))));
    }
    records.push_back(make_record(std::move(probs), std::move(truth), kind));
  }
  return records;
}

// Exhaustive per-record recount for top-k.
double topk_oracle(const std::vector<EvalRecord>& records, int k) {
  std::size_t hits = 0;
  for (const auto& r : records) {
    const int K = r.scores.num_classes();
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return r.scores.probs[a] > r.scores.probs[b]; });
    for (int i = 0; i < k; ++i)
      if (std::find(r.truth.begin(), r.truth.end(), order[i]) != r.truth.end()) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// Brute-force AP over all ranks.
double map_oracle(const std::vector<EvalRecord>& records, int K) {
  double ap_sum = 0.0;
  int used = 0;
  for (int k = 0; k < K; ++k) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].scores.probs[k] > records[b].scores.probs[k]; });
    std::size_t pos = 0;
    double prec_sum = 0.0;
    for (std::size_t rank = 1; rank <= order.size(); ++rank) {
      const auto& truth = records[order[rank - 1]].truth;
      if (std::find(truth.begin(), truth.end(), k) != truth.end()) {
        ++pos;
        prec_sum += static_cast<double>(pos) / static_cast<double>(rank);
      }
    }
    if (pos > 0) {
      ap_sum += prec_sum / static_cast<double>(pos);
      ++used;
    }
  }
  return ap_sum / used;
}

// TP/FP/FN recount for micro F1.
double f1_oracle(const std::vector<EvalRecord>& records, int K, double threshold) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& r : records)
    for (int k = 0; k < K; ++k) {
      bool pred = r.scores.probs[k] > threshold;
      bool act = std::find(r.truth.begin(), r.truth.end(), k) != r.truth.end();
      if (pred && act) ++tp;
      if (pred && !act) ++fp;
      if (!pred && act) ++fn;
    }
  double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

// Direct contingency-table kappa.
double kappa_oracle(const LabeledTimeline& a, const LabeledTimeline& b, int K) {
  std::vector<std::vector<double>> table(K, std::vector<double>(K, 0.0));
  double n = 0.0;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    if (!a.labels[i]) continue;
    table[*a.labels[i]][*b.labels[i]] += 1.0;
    n += 1.0;
  }
  double po = 0.0, pe = 0.0;
  for (int i = 0; i < K; ++i) {
    po += table[i][i] / n;
    double row = 0.0, col = 0.0;
    for (int j = 0; j < K; ++j) {
      row += table[i][j];
      col += table[j][i];
    }
    pe += (row / n) * (col / n);
  }
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace

TEST_CASE("top-k: basic fractions") {
  std::vector<EvalRecord> records;
  records.push_back(make_record({0.7, 0.2, 0.1}, {0}, ScoreKind::single_label));
  records.push_back(make_record({0.1, 0.8, 0.1}, {1}, ScoreKind::single_label));
  records.push_back(make_record({0.3, 0.3, 0.4}, {2}, ScoreKind::single_label));
  records.push_back(make_record({0.9, 0.05, 0.05}, {1}, ScoreKind::single_label));
  CHECK(top_k_accuracy(records, 1) == doctest::Approx(0.75));
  CHECK(top_k_accuracy(records, 3) == doctest::Approx(1.0));
}

TEST_CASE("top-k: oracle agreement and monotonicity in k") {
  Rng rng(81);
  for (int iter = 0; iter < 20; ++iter) {
    auto records = random_records(50, 7, ScoreKind::single_label, rng);
    double prev = 0.0;
    for (int k = 1; k <= 7; ++k) {
      double acc = top_k_accuracy(records, k);
      CHECK(acc == doctest::Approx(topk_oracle(records, k)).epsilon(1e-12));
      CHECK(acc >= prev);
      prev = acc;
    }
    CHECK(top_k_accuracy(records, 7) == doctest::Approx(1.0));
  }
}

TEST_CASE("top-k: errors") {
  CHECK_THROWS_AS(top_k_accuracy({}, 1), EmptyInput);
  std::vector<EvalRecord> multi{make_record({0.5, 0.5}, {0}, ScoreKind::multi_label)};
  CHECK_THROWS_AS(top_k_accuracy(multi, 1), KindError);
  std::vector<EvalRecord> ok{make_record({0.5, 0.5}, {0}, ScoreKind::single_label)};
  CHECK_THROWS_AS(top_k_accuracy(ok, 0), RangeError);
  CHECK_THROWS_AS(top_k_accuracy(ok, 3), RangeError);
}

TEST_CASE("mAP: perfect ranking scores 1") {
  std::vector<EvalRecord> records;
  records.push_back(make_record({0.9, 0.8}, {0, 1}, ScoreKind::multi_label));
  records.push_back(make_record({0.8, 0.1}, {0}, ScoreKind::multi_label));
  records.push_back(make_record({0.1, 0.9}, {1}, ScoreKind::multi_label));
  CHECK(mean_average_precision(records) == doctest::Approx(1.0));
}

TEST_CASE("mAP: hand example AP = (1 + 2/3)/2") {
  // Class 0 ranking: 0.9(+), 0.8(-), 0.7(+)  ->  AP_0 = (1/1 + 2/3)/2 = 5/6.
  // Class 1 ranking: 0.9(+), 0.2(-), 0.1(+)  ->  AP_1 = (1/1 + 2/3)/2 = 5/6.
  std::vector<EvalRecord> records;
  records.push_back(make_record({0.9, 0.1}, {0, 1}, ScoreKind::multi_label));
  records.push_back(make_record({0.8, 0.9}, {1}, ScoreKind::multi_label));
  records.push_back(make_record({0.7, 0.2}, {0}, ScoreKind::multi_label));
  CHECK(mean_average_precision(records) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("mAP: oracle agreement and monotone-transform invariance") {
  Rng rng(82);
  for (int iter = 0; iter < 25; ++iter) {
    auto records = random_records(10, 3, ScoreKind::multi_label, rng);
    double value = mean_average_precision(records);
    CHECK(value == doctest::Approx(map_oracle(records, 3)).epsilon(1e-12));
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);

    auto transformed = records;
    for (auto& r : transformed)
      for (auto& p : r.scores.probs) p = p * p * p;  // strictly monotone on [0,1]
    CHECK(mean_average_precision(transformed) == doctest::Approx(value).epsilon(1e-12));
  }
}

TEST_CASE("F1: perfect predictions and empty predictions") {
  std::vector<EvalRecord> perfect;
  perfect.push_back(make_record({0.9, 0.1}, {0}, ScoreKind::multi_label));
  perfect.push_back(make_record({0.8, 0.9}, {0, 1}, ScoreKind::multi_label));
  CHECK(f1_multilabel(perfect, 0.5) == doctest::Approx(1.0));

  std::vector<EvalRecord> silent;
  silent.push_back(make_record({0.1, 0.2}, {0}, ScoreKind::multi_label));
  silent.push_back(make_record({0.3, 0.4}, {1}, ScoreKind::multi_label));
  CHECK(f1_multilabel(silent, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("F1: confusion-count oracle, micro and macro bounds") {
  Rng rng(83);
  for (int iter = 0; iter < 25; ++iter) {
    auto records = random_records(15, 4, ScoreKind::multi_label, rng);
    double micro = f1_multilabel(records, 0.5);
    CHECK(micro == doctest::Approx(f1_oracle(records, 4, 0.5)).epsilon(1e-12));
    double macro = f1_multilabel(records, 0.5, F1Average::macro);
    CHECK(macro >= 0.0);
    CHECK(macro <= 1.0);
  }
}

TEST_CASE("kappa: perfect agreement") {
  LabeledTimeline a;
  a.labels = {0, 1, 2, 1, 0};
  CHECK(cohens_kappa(a, a) == doctest::Approx(1.0));
}

TEST_CASE("kappa: textbook 2x2 case is exactly zero") {
  LabeledTimeline a, b;
  a.labels = {0, 0, 1, 1};
  b.labels = {0, 1, 0, 1};
  // p_o = 0.5, p_e = 0.5 by hand.
  CHECK(cohens_kappa(a, b) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kappa: contingency oracle, symmetry, permutation invariance") {
  Rng rng(84);
  for (int iter = 0; iter < 25; ++iter) {
    LabeledTimeline a = testutil::random_timeline(100, 4, 0.1, rng);
    LabeledTimeline b = a;
    for (std::size_t i = 0; i < b.labels.size(); ++i) {
      if (!b.labels[i]) continue;
      if (rng.next_double() < 0.3)
        b.labels[i] = static_cast<int>(rng.next_below(4));
    }
    double k1 = cohens_kappa(a, b);
    CHECK(k1 == doctest::Approx(kappa_oracle(a, b, 4)).epsilon(1e-10));
    CHECK(cohens_kappa(b, a) == doctest::Approx(k1).epsilon(1e-12));
    CHECK(k1 >= -1.0);
    CHECK(k1 <= 1.0);

    auto permute = [](LabeledTimeline t) {
      const int perm[4] = {2, 3, 1, 0};
      for (auto& l : t.labels)
        if (l) l = perm[*l];
      return t;
    };
    CHECK(cohens_kappa(permute(a), permute(b)) == doctest::Approx(k1).epsilon(1e-10));
  }
}

TEST_CASE("kappa: alignment errors") {
  LabeledTimeline a, b;
  a.labels = {0, 1};
  b.labels = {0, 1, 2};
  CHECK_THROWS_AS(cohens_kappa(a, b), AlignmentError);

  b.labels = {0, std::nullopt};
  CHECK_THROWS_AS(cohens_kappa(a, b), AlignmentError);
}

TEST_CASE("metrics csv output") {
  std::vector<std::pair<std::string, double>> metrics{{"top1", 0.75}, {"top3", 1.0}};
  std::ostringstream csv;
  write_metrics_csv(csv, metrics);
  CHECK(csv.str() == "metric,value\ntop1,0.75\ntop3,1\n");
  std::ostringstream text;
  write_metrics_text(text, metrics);
  CHECK(text.str().find("top1") != std::string::npos);
}
