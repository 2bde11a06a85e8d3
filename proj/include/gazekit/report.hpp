#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gazekit/analytics.hpp"
#include "gazekit/bench.hpp"
#include "gazekit/timeline.hpp"

namespace gazekit {

struct ReportInputs {
  const ClassTaxonomy* taxonomy = nullptr;
  const LabeledTimeline* predicted = nullptr;
  const LabeledTimeline* truth = nullptr;  // optional; enables the z-test table
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<BenchReport> bench;
  double alpha = 0.05;
  bool collapse_runs = false;
};

// Writes the analytics tables (frequencies, z-tests, transitions, dwell
// segments) as CSV plus three SVG charts: grouped frequency bars, the
// transition heatmap (diagonal excluded from the color scale) and the
// timeline strip. Outputs are byte-deterministic for fixed inputs. With an
// unlabeled timeline only the CSV headers are produced.
void emit_report(const std::filesystem::path& outdir, const ReportInputs& inputs);

}  // namespace gazekit
