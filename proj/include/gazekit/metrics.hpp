#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gazekit/classify.hpp"
#include "gazekit/timeline.hpp"

namespace gazekit {

struct EvalRecord {
  ClassScores scores;
  std::vector<int> truth;  // non-empty label set; singleton in the single-label setting
};

// Fraction of records whose truth set intersects the top-k prediction.
// Requires single-label score kind.
double top_k_accuracy(std::span<const EvalRecord> records, int k);

// Mean over classes (with at least one positive) of average precision:
// records ranked per class by score, ties broken by record order, precision
// averaged at the positive ranks.
double mean_average_precision(std::span<const EvalRecord> records);

enum class F1Average { micro, macro };

// Binarizes scores at `score > threshold`. Micro averages counts over all
// (record, class) decisions; macro averages per-class F1 over all classes.
// F1 is 0 whenever precision + recall is 0.
double f1_multilabel(std::span<const EvalRecord> records, double threshold = 0.5,
                     F1Average average = F1Average::micro);

// Chance-corrected agreement between two raters over the same frame set.
// Both timelines must label exactly the same frame positions.
double cohens_kappa(const LabeledTimeline& rater1, const LabeledTimeline& rater2);

// `metric,value` CSV and an aligned plain-text rendering.
void write_metrics_csv(std::ostream& out, std::span<const std::pair<std::string, double>> metrics);
void write_metrics_text(std::ostream& out, std::span<const std::pair<std::string, double>> metrics);

}  // namespace gazekit
