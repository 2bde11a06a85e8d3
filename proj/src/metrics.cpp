#include "gazekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gazekit/errors.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

namespace {

void check_records(std::span<const EvalRecord> records, ScoreKind expected) {
  if (records.empty()) throw EmptyInput("no evaluation records");
  const int K = records.front().scores.num_classes();
  for (const auto& r : records) {
    if (r.scores.kind != expected) throw KindError("record score kind does not match metric");
    if (r.scores.num_classes() != K) throw ShapeError("records disagree on class count");
    if (r.truth.empty()) throw EmptyInput("record has an empty truth set");
    for (int t : r.truth)
      if (t < 0 || t >= K) throw RangeError("truth label outside taxonomy");
  }
}

}  // namespace

double top_k_accuracy(std::span<const EvalRecord> records, int k) {
  check_records(records, ScoreKind::single_label);
  const int K = records.front().scores.num_classes();
  if (k < 1 || k > K) throw RangeError("k must lie in [1, K]");

  std::size_t hits = 0;
  for (const auto& r : records) {
    auto top = predict_topk(r.scores, k);
    bool hit = std::any_of(r.truth.begin(), r.truth.end(), [&](int t) {
      return std::find(top.begin(), top.end(), t) != top.end();
    });
    if (hit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mean_average_precision(std::span<const EvalRecord> records) {
  check_records(records, ScoreKind::multi_label);
  const int K = records.front().scores.num_classes();

  double ap_sum = 0.0;
  int classes_with_positives = 0;
  std::vector<std::size_t> order(records.size());
  for (int k = 0; k < K; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return records[a].scores.probs[static_cast<std::size_t>(k)] >
             records[b].scores.probs[static_cast<std::size_t>(k)];
    });

    std::size_t positives_seen = 0;
    double precision_sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const auto& truth = records[order[rank]].truth;
      if (std::find(truth.begin(), truth.end(), k) != truth.end()) {
        ++positives_seen;
        precision_sum += static_cast<double>(positives_seen) / static_cast<double>(rank + 1);
      }
    }
    if (positives_seen > 0) {
      ap_sum += precision_sum / static_cast<double>(positives_seen);
      ++classes_with_positives;
    }
  }
  if (classes_with_positives == 0) throw UndefinedMetric("no class has a positive record");
  return ap_sum / static_cast<double>(classes_with_positives);
}

double f1_multilabel(std::span<const EvalRecord> records, double threshold, F1Average average) {
  check_records(records, ScoreKind::multi_label);
  const int K = records.front().scores.num_classes();

  auto f1_from_counts = [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  };

  if (average == F1Average::micro) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& r : records)
      for (int k = 0; k < K; ++k) {
        bool predicted = r.scores.probs[static_cast<std::size_t>(k)] > threshold;
        bool actual = std::find(r.truth.begin(), r.truth.end(), k) != r.truth.end();
        tp += predicted && actual;
        fp += predicted && !actual;
        fn += !predicted && actual;
      }
    return f1_from_counts(tp, fp, fn);
  }

  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& r : records) {
      bool predicted = r.scores.probs[static_cast<std::size_t>(k)] > threshold;
      bool actual = std::find(r.truth.begin(), r.truth.end(), k) != r.truth.end();
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
    sum += f1_from_counts(tp, fp, fn);
  }
  return sum / static_cast<double>(K);
}

double cohens_kappa(const LabeledTimeline& rater1, const LabeledTimeline& rater2) {
  if (rater1.labels.size() != rater2.labels.size())
    throw AlignmentError("rater timelines cover different frame sets");

  int max_label = -1;
  std::size_t paired = 0;
  for (std::size_t i = 0; i < rater1.labels.size(); ++i) {
    if (rater1.labels[i].has_value() != rater2.labels[i].has_value())
      throw AlignmentError("raters label different frame subsets");
    if (!rater1.labels[i]) continue;
    ++paired;
    max_label = std::max({max_label, *rater1.labels[i], *rater2.labels[i]});
  }
  if (paired == 0) throw EmptyInput("no jointly labeled frames");

  const std::size_t K = static_cast<std::size_t>(max_label) + 1;
  std::vector<double> marg1(K, 0.0), marg2(K, 0.0);
  double observed = 0.0;
  for (std::size_t i = 0; i < rater1.labels.size(); ++i) {
    if (!rater1.labels[i]) continue;
    int a = *rater1.labels[i];
    int b = *rater2.labels[i];
    marg1[static_cast<std::size_t>(a)] += 1.0;
    marg2[static_cast<std::size_t>(b)] += 1.0;
    if (a == b) observed += 1.0;
  }
  const double n = static_cast<double>(paired);
  const double p_o = observed / n;
  double p_e = 0.0;
  for (std::size_t k = 0; k < K; ++k) p_e += (marg1[k] / n) * (marg2[k] / n);

  if (p_e >= 1.0) return 1.0;  // both raters constant and equal
  return (p_o - p_e) / (1.0 - p_e);
}

void write_metrics_csv(std::ostream& out, std::span<const std::pair<std::string, double>> metrics) {
  out << "metric,value\n";
  for (const auto& [name, value] : metrics) out << name << ',' << format_double(value) << '\n';
}

void write_metrics_text(std::ostream& out, std::span<const std::pair<std::string, double>> metrics) {
  std::size_t width = 0;
  for (const auto& [name, value] : metrics) width = std::max(width, name.size());
  for (const auto& [name, value] : metrics) {
    out << name;
    for (std::size_t i = name.size(); i < width + 2; ++i) out << ' ';
    out << format_fixed(value, 6) << '\n';
  }
}

}  // namespace gazekit
