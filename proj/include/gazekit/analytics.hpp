#pragma once

#include <cstdint>
#include <vector>

#include "gazekit/timeline.hpp"

namespace gazekit {

// Proportions over labeled frames; indices follow the taxonomy order.
std::vector<double> class_frequencies(const LabeledTimeline& t, int num_classes);

struct ZTestCore {
  double z = 0.0;
  double p_value = 1.0;
};

// Pooled two-proportion z-test; two-sided p-value from the standard normal
// tail via erfc. z is defined as 0 when the pooled proportion is 0 or 1.
ZTestCore two_proportion_ztest(std::int64_t x1, std::int64_t n1, std::int64_t x2, std::int64_t n2);

double bonferroni_threshold(double alpha, int num_tests);

struct ZTestResult {
  int class_index = 0;
  double p_observed = 0.0;
  double p_expected = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  bool significant_raw = false;
  bool significant_bonferroni = false;
};

// One z-test per class present in either timeline, comparing per-class
// proportions of labeled frames. The Bonferroni level is alpha divided by
// the number of classes tested.
std::vector<ZTestResult> compare_timelines(const LabeledTimeline& pred, const LabeledTimeline& truth,
                                           double alpha);

struct TransitionMatrix {
  int num_classes = 0;
  std::vector<std::uint64_t> counts;  // K x K row-major, from -> to
  std::vector<double> probs;          // per-row normalized; zero rows stay zero

  std::uint64_t count_at(int from, int to) const {
    return counts[static_cast<std::size_t>(from) * num_classes + to];
  }
  double prob_at(int from, int to) const {
    return probs[static_cast<std::size_t>(from) * num_classes + to];
  }
};

// Counts consecutive labeled-frame pairs. A pair spanning an unlabeled gap
// is not a transition. With collapse_runs, runs of one class merge first so
// only class changes count (zero diagonal).
TransitionMatrix transition_matrix(const LabeledTimeline& t, int num_classes, bool collapse_runs);

struct DwellSegment {
  int class_index = 0;
  std::size_t start_frame = 0;
  std::size_t length = 0;
  double duration_ms = 0.0;
  bool operator==(const DwellSegment&) const = default;
};

// Run-length encoding of the labeled runs; unlabeled frames separate runs
// and produce no segment. Decoding the segments reconstructs the timeline.
std::vector<DwellSegment> dwell_segments(const LabeledTimeline& t);

}  // namespace gazekit
