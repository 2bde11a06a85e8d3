#include "gazekit/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gazekit/errors.hpp"

namespace gazekit {

std::vector<double> class_frequencies(const LabeledTimeline& t, int num_classes) {
  if (t.labels.empty()) throw EmptyInput("timeline is empty");
  std::vector<double> freq(static_cast<std::size_t>(num_classes), 0.0);
  std::size_t labeled = 0;
  for (const auto& l : t.labels) {
    if (!l) continue;
    if (*l < 0 || *l >= num_classes) throw RangeError("timeline label outside taxonomy");
    freq[static_cast<std::size_t>(*l)] += 1.0;
    ++labeled;
  }
  if (labeled == 0) throw EmptyInput("timeline has no labeled frames");
  for (auto& f : freq) f /= static_cast<double>(labeled);
  return freq;
}

ZTestCore two_proportion_ztest(std::int64_t x1, std::int64_t n1, std::int64_t x2, std::int64_t n2) {
  if (n1 < 1 || n2 < 1) throw InvalidInput("sample sizes must be at least 1");
  if (x1 < 0 || x1 > n1 || x2 < 0 || x2 > n2) throw InvalidInput("counts must lie in [0, n]");

  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);

  ZTestCore out;
  if (pooled <= 0.0 || pooled >= 1.0) {
    out.z = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  out.z = (p1 - p2) / se;
  // 2*(1 - Phi(|z|)) == erfc(|z|/sqrt(2)); erfc keeps absolute error below 1e-12.
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

double bonferroni_threshold(double alpha, int num_tests) {
  if (num_tests < 1) throw InvalidInput("number of tests must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");
  return alpha / static_cast<double>(num_tests);
}

std::vector<ZTestResult> compare_timelines(const LabeledTimeline& pred, const LabeledTimeline& truth,
                                           double alpha) {
  if (pred.labels.size() != truth.labels.size())
    throw AlignmentError("timelines cover different frame sets");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");

  std::int64_t n_pred = 0, n_truth = 0;
  std::set<int> classes;
  for (const auto& l : pred.labels)
    if (l) {
      ++n_pred;
      classes.insert(*l);
    }
  for (const auto& l : truth.labels)
    if (l) {
      ++n_truth;
      classes.insert(*l);
    }
  if (n_pred == 0 || n_truth == 0) throw EmptyInput("timeline has no labeled frames");

  const int m = static_cast<int>(classes.size());
  const double corrected = bonferroni_threshold(alpha, m);

  std::vector<ZTestResult> results;
  for (int k : classes) {
    std::int64_t x_pred = 0, x_truth = 0;
    for (const auto& l : pred.labels)
      if (l && *l == k) ++x_pred;
    for (const auto& l : truth.labels)
      if (l && *l == k) ++x_truth;

    ZTestCore core = two_proportion_ztest(x_pred, n_pred, x_truth, n_truth);
    ZTestResult r;
    r.class_index = k;
    r.p_observed = static_cast<double>(x_pred) / static_cast<double>(n_pred);
    r.p_expected = static_cast<double>(x_truth) / static_cast<double>(n_truth);
    r.z = core.z;
    r.p_value = core.p_value;
    r.significant_raw = core.p_value < alpha;
    r.significant_bonferroni = core.p_value < corrected;
    results.push_back(r);
  }
  return results;
}

TransitionMatrix transition_matrix(const LabeledTimeline& t, int num_classes, bool collapse_runs) {
  std::size_t labeled = t.labeled_count();
  if (labeled < 2) throw InsufficientData("need at least 2 labeled frames");

  TransitionMatrix m;
  m.num_classes = num_classes;
  m.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
  m.probs.assign(m.counts.size(), 0.0);

  // Contiguous labeled stretches; a gap breaks adjacency.
  std::size_t i = 0;
  const std::size_t n = t.labels.size();
  while (i < n) {
    if (!t.labels[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && t.labels[j + 1]) ++j;

    int prev = -1;
    for (std::size_t p = i; p <= j; ++p) {
      int cur = *t.labels[p];
      if (cur < 0 || cur >= num_classes) throw RangeError("timeline label outside taxonomy");
      if (p > i && (!collapse_runs || cur != prev))
        ++m.counts[static_cast<std::size_t>(prev) * num_classes + cur];
      prev = cur;
    }
    i = j + 1;
  }

  for (int from = 0; from < num_classes; ++from) {
    std::uint64_t row_total = 0;
    for (int to = 0; to < num_classes; ++to) row_total += m.count_at(from, to);
    if (row_total == 0) continue;
    for (int to = 0; to < num_classes; ++to)
      m.probs[static_cast<std::size_t>(from) * num_classes + to] =
          static_cast<double>(m.count_at(from, to)) / static_cast<double>(row_total);
  }
  return m;
}

std::vector<DwellSegment> dwell_segments(const LabeledTimeline& t) {
  if (t.labels.empty()) throw EmptyInput("timeline is empty");
  std::vector<DwellSegment> segments;
  const double frame_ms = 1000.0 / t.fps;
  std::size_t i = 0;
  while (i < t.labels.size()) {
    if (!t.labels[i]) {
      ++i;
      continue;
    }
    int cls = *t.labels[i];
    std::size_t j = i;
    while (j + 1 < t.labels.size() && t.labels[j + 1] && *t.labels[j + 1] == cls) ++j;
    std::size_t len = j - i + 1;
    segments.push_back(DwellSegment{cls, i, len, static_cast<double>(len) * frame_ms});
    i = j + 1;
  }
  return segments;
}

}  // namespace gazekit
