#include "gazekit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gazekit/errors.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

namespace {

const char* kClassColors[] = {
    "#4472c4", "#ed7d31", "#a5a5a5", "#ffc000", "#5b9bd5", "#70ad47",
    "#9e480e", "#997300", "#43682b", "#255e91", "#636363", "#c00000",
};

const char* class_color(int k) {
  return kClassColors[static_cast<std::size_t>(k) % std::size(kClassColors)];
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create report file: " + path.string());
  return out;
}

std::string svg_header(int width, int height, const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << title << "</text>\n";
  return os.str();
}

// Mixes white toward the base heat color; v in [0,1].
std::string heat_fill(double v) {
  int r = static_cast<int>(std::lround(255.0 + (31.0 - 255.0) * v));
  int g = static_cast<int>(std::lround(255.0 + (78.0 - 255.0) * v));
  int b = static_cast<int>(std::lround(255.0 + (140.0 - 255.0) * v));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void write_frequency_csv(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                         const std::vector<double>* pred, const std::vector<double>* truth) {
  auto out = open_out(path);
  out << (truth ? "class,pred_freq,truth_freq\n" : "class,pred_freq\n");
  if (!pred) return;
  for (int k = 0; k < taxonomy.size(); ++k) {
    out << taxonomy.name(k) << ',' << format_double((*pred)[static_cast<std::size_t>(k)]);
    if (truth) out << ',' << format_double((*truth)[static_cast<std::size_t>(k)]);
    out << '\n';
  }
}

void write_ztest_csv(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                     const std::vector<ZTestResult>* results) {
  auto out = open_out(path);
  out << "class,p_observed,p_expected,z,p_value,significant_raw,significant_bonferroni\n";
  if (!results) return;
  for (const auto& r : *results) {
    out << taxonomy.name(r.class_index) << ',' << format_double(r.p_observed) << ','
        << format_double(r.p_expected) << ',' << format_double(r.z) << ',' << format_double(r.p_value)
        << ',' << (r.significant_raw ? 1 : 0) << ',' << (r.significant_bonferroni ? 1 : 0) << '\n';
  }
}

void write_transition_csv(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                          const TransitionMatrix* m) {
  auto out = open_out(path);
  out << "from,to,count,prob\n";
  if (!m) return;
  for (int from = 0; from < m->num_classes; ++from)
    for (int to = 0; to < m->num_classes; ++to)
      out << taxonomy.name(from) << ',' << taxonomy.name(to) << ',' << m->count_at(from, to) << ','
          << format_double(m->prob_at(from, to)) << '\n';
}

void write_dwell_csv(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                     const std::vector<DwellSegment>* segments) {
  auto out = open_out(path);
  out << "class,start_frame,length,duration_ms\n";
  if (!segments) return;
  for (const auto& s : *segments)
    out << taxonomy.name(s.class_index) << ',' << s.start_frame << ',' << s.length << ','
        << format_double(s.duration_ms) << '\n';
}

void write_frequency_svg(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                         const std::vector<double>* pred, const std::vector<double>* truth) {
  auto out = open_out(path);
  const int width = 760, height = 420;
  out << svg_header(width, height, truth ? "Gaze target frequency: predicted vs ground truth"
                                         : "Gaze target frequency");
  if (pred) {
    const int K = taxonomy.size();
    const double chart_x = 60.0, chart_y = 50.0, chart_h = 280.0;
    const double chart_w = 660.0;
    const double group_w = chart_w / K;
    const double bar_w = truth ? group_w * 0.35 : group_w * 0.6;

    out << "<line x1=\"" << format_fixed(chart_x, 2) << "\" y1=\"" << format_fixed(chart_y + chart_h, 2)
        << "\" x2=\"" << format_fixed(chart_x + chart_w, 2) << "\" y2=\""
        << format_fixed(chart_y + chart_h, 2) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k < K; ++k) {
      double x0 = chart_x + k * group_w + group_w * 0.1;
      double hp = (*pred)[static_cast<std::size_t>(k)] * chart_h;
      out << "<rect class=\"bar-pred\" x=\"" << format_fixed(x0, 2) << "\" y=\""
          << format_fixed(chart_y + chart_h - hp, 2) << "\" width=\"" << format_fixed(bar_w, 2)
          << "\" height=\"" << format_fixed(hp, 2) << "\" fill=\"" << class_color(k) << "\"/>\n";
      if (truth) {
        double ht = (*truth)[static_cast<std::size_t>(k)] * chart_h;
        out << "<rect class=\"bar-truth\" x=\"" << format_fixed(x0 + bar_w + 2.0, 2) << "\" y=\""
            << format_fixed(chart_y + chart_h - ht, 2) << "\" width=\"" << format_fixed(bar_w, 2)
            << "\" height=\"" << format_fixed(ht, 2) << "\" fill=\"#9e9e9e\"/>\n";
      }
      out << "<text x=\"" << format_fixed(x0 + bar_w / 2, 2) << "\" y=\""
          << format_fixed(chart_y + chart_h + 14.0, 2)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << k
          << "</text>\n";
    }
    for (int k = 0; k < K; ++k)
      out << "<text x=\"60\" y=\"" << format_fixed(chart_y + chart_h + 32.0 + 14.0 * k, 2)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << class_color(k) << "\">" << k
          << " = " << taxonomy.name(k) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_heatmap_svg(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                       const TransitionMatrix* m) {
  auto out = open_out(path);
  const int width = 640, height = 560;
  out << svg_header(width, height, "Gaze transition probabilities (row-normalized)");
  if (m) {
    const int K = m->num_classes;
    const double cell = std::min(48.0, 440.0 / K);
    const double grid_x = 90.0, grid_y = 60.0;

    // Diagonal self-loops stay out of the color scale so off-diagonal
    // structure remains visible.
    double max_off = 0.0;
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        if (i != j) max_off = std::max(max_off, m->prob_at(i, j));

    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) {
        double x = grid_x + j * cell, y = grid_y + i * cell;
        std::string fill = i == j ? std::string("#e0e0e0")
                                  : heat_fill(max_off > 0.0 ? m->prob_at(i, j) / max_off : 0.0);
        out << "<rect class=\"cell\" x=\"" << format_fixed(x, 2) << "\" y=\"" << format_fixed(y, 2)
            << "\" width=\"" << format_fixed(cell, 2) << "\" height=\"" << format_fixed(cell, 2)
            << "\" fill=\"" << fill << "\" stroke=\"#ffffff\"/>\n";
        out << "<text x=\"" << format_fixed(x + cell / 2, 2) << "\" y=\""
            << format_fixed(y + cell / 2 + 4.0, 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_fixed(m->prob_at(i, j), 2) << "</text>\n";
      }
      out << "<text x=\"" << format_fixed(grid_x - 8.0, 2) << "\" y=\""
          << format_fixed(grid_y + i * cell + cell / 2 + 4.0, 2)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << i << "</text>\n";
      out << "<text x=\"" << format_fixed(grid_x + i * cell + cell / 2, 2) << "\" y=\""
          << format_fixed(grid_y + K * cell + 16.0, 2)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << i
          << "</text>\n";
    }
    for (int k = 0; k < K; ++k)
      out << "<text x=\"90\" y=\"" << format_fixed(grid_y + K * cell + 40.0 + 14.0 * k, 2)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << k << " = " << taxonomy.name(k)
          << "</text>\n";
  }
  out << "</svg>\n";
}

void write_strip_svg(const std::filesystem::path& path, const ClassTaxonomy& taxonomy,
                     const LabeledTimeline* timeline, const std::vector<DwellSegment>* segments) {
  auto out = open_out(path);
  const int width = 760, height = 220;
  out << svg_header(width, height, "Gaze targets across the session");
  if (timeline && segments && !timeline->labels.empty()) {
    const double x0 = 40.0, x1 = 720.0, y0 = 50.0, strip_h = 60.0;
    const double scale = (x1 - x0) / static_cast<double>(timeline->labels.size());
    out << "<rect x=\"" << format_fixed(x0, 2) << "\" y=\"" << format_fixed(y0, 2) << "\" width=\""
        << format_fixed(x1 - x0, 2) << "\" height=\"" << format_fixed(strip_h, 2)
        << "\" fill=\"#f2f2f2\"/>\n";
    for (const auto& s : *segments) {
      out << "<rect class=\"segment\" x=\"" << format_fixed(x0 + s.start_frame * scale, 2) << "\" y=\""
          << format_fixed(y0, 2) << "\" width=\"" << format_fixed(s.length * scale, 2)
          << "\" height=\"" << format_fixed(strip_h, 2) << "\" fill=\"" << class_color(s.class_index)
          << "\"/>\n";
    }
    out << "<text x=\"40\" y=\"" << format_fixed(y0 + strip_h + 20.0, 2)
        << "\" font-family=\"sans-serif\" font-size=\"11\">frames 0.."
        << timeline->labels.size() - 1 << "</text>\n";
    for (int k = 0; k < taxonomy.size(); ++k)
      out << "<text x=\"40\" y=\"" << format_fixed(y0 + strip_h + 40.0 + 14.0 * k, 2)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << class_color(k) << "\">" << k
          << " = " << taxonomy.name(k) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void emit_report(const std::filesystem::path& outdir, const ReportInputs& inputs) {
  if (!inputs.taxonomy || !inputs.predicted) throw InvalidInput("report needs a taxonomy and a timeline");
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec || !std::filesystem::is_directory(outdir)) throw IoError("cannot create report directory: " + outdir.string());

  const ClassTaxonomy& taxonomy = *inputs.taxonomy;
  const LabeledTimeline& pred = *inputs.predicted;
  const bool has_labels = pred.labeled_count() > 0;

  std::optional<std::vector<double>> pred_freq, truth_freq;
  std::optional<std::vector<ZTestResult>> ztests;
  std::optional<TransitionMatrix> transitions;
  std::optional<std::vector<DwellSegment>> dwell;

  if (has_labels) {
    pred_freq = class_frequencies(pred, taxonomy.size());
    if (inputs.truth && inputs.truth->labeled_count() > 0) {
      truth_freq = class_frequencies(*inputs.truth, taxonomy.size());
      ztests = compare_timelines(pred, *inputs.truth, inputs.alpha);
    }
    if (pred.labeled_count() >= 2)
      transitions = transition_matrix(pred, taxonomy.size(), inputs.collapse_runs);
    dwell = dwell_segments(pred);
  }

  write_frequency_csv(outdir / "frequencies.csv", taxonomy, pred_freq ? &*pred_freq : nullptr,
                      truth_freq ? &*truth_freq : nullptr);
  write_ztest_csv(outdir / "ztests.csv", taxonomy, ztests ? &*ztests : nullptr);
  write_transition_csv(outdir / "transitions.csv", taxonomy, transitions ? &*transitions : nullptr);
  write_dwell_csv(outdir / "dwell.csv", taxonomy, dwell ? &*dwell : nullptr);

  if (!inputs.metrics.empty()) {
    auto out = open_out(outdir / "metrics.csv");
    out << "metric,value\n";
    for (const auto& [name, value] : inputs.metrics) out << name << ',' << format_double(value) << '\n';
  }
  if (!inputs.bench.empty()) {
    auto raw = open_out(outdir / "bench.csv");
    write_bench_csv(raw, inputs.bench);
    auto summary = open_out(outdir / "bench_summary.csv");
    write_bench_summary_csv(summary, inputs.bench);
  }

  write_frequency_svg(outdir / "frequency_bars.svg", taxonomy, pred_freq ? &*pred_freq : nullptr,
                      truth_freq ? &*truth_freq : nullptr);
  write_heatmap_svg(outdir / "transition_heatmap.svg", taxonomy,
                    transitions ? &*transitions : nullptr);
  write_strip_svg(outdir / "timeline_strip.svg", taxonomy, has_labels ? &pred : nullptr,
                  dwell ? &*dwell : nullptr);
}

}  // namespace gazekit
