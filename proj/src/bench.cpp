#include "gazekit/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "gazekit/errors.hpp"
#include "gazekit/text.hpp"

namespace gazekit {

namespace {

std::vector<Image> take_frames(const FrameSource& source, std::size_t n) {
  std::vector<Image> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto f = source();
    if (!f) throw InvalidInput("frame source exhausted before the workload completed");
    frames.push_back(std::move(*f));
  }
  return frames;
}

void run_batches(const BatchStage& stage, std::span<const Image> frames, int batch_size) {
  for (std::size_t start = 0; start < frames.size(); start += static_cast<std::size_t>(batch_size)) {
    std::size_t count = std::min(static_cast<std::size_t>(batch_size), frames.size() - start);
    stage(frames.subspan(start, count));
  }
}

}  // namespace

std::string hardware_id() {
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (cpuinfo && get_line(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto name = trim(std::string_view(line).substr(colon + 1));
        if (!name.empty()) return std::string(name);
      }
    }
  }
  return "unknown";
}

BenchReport measure_fps(const std::string& pipeline_name, const BatchStage& stage,
                        const FrameSource& source, const BenchConfig& cfg) {
  if (cfg.batch_size < 1 || cfg.repetitions < 1 || cfg.warmup_batches < 0 || cfg.frames_per_rep < 1)
    throw InvalidInput("benchmark configuration fields must be positive");

  BenchReport report;
  report.pipeline_name = pipeline_name;
  report.config = cfg;
  report.hardware = hardware_id();

  using clock = std::chrono::steady_clock;
  try {
    auto warmup = take_frames(source, static_cast<std::size_t>(cfg.warmup_batches) * cfg.batch_size);
    run_batches(stage, warmup, cfg.batch_size);

    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      auto frames = take_frames(source, static_cast<std::size_t>(cfg.frames_per_rep));
      auto t0 = clock::now();
      run_batches(stage, frames, cfg.batch_size);
      auto t1 = clock::now();
      double seconds = std::chrono::duration<double>(t1 - t0).count();
      if (seconds <= 0.0) seconds = 1e-9;  // clock resolution floor
      report.fps_per_rep.push_back(static_cast<double>(cfg.frames_per_rep) / seconds);
    }
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception& e) {
    throw BenchAborted(std::string("stage failed: ") + e.what());
  }

  double sum = 0.0;
  for (double f : report.fps_per_rep) sum += f;
  report.mean_fps = sum / static_cast<double>(report.fps_per_rep.size());
  double var = 0.0;
  for (double f : report.fps_per_rep) var += (f - report.mean_fps) * (f - report.mean_fps);
  report.std_fps = std::sqrt(var / static_cast<double>(report.fps_per_rep.size()));
  return report;
}

std::vector<BenchReport> bench_matrix(
    std::span<const std::pair<std::string, BatchStage>> pipelines,
    std::span<const BenchConfig> configs,
    const std::function<FrameSource(const BenchConfig&)>& make_source) {
  if (pipelines.empty() || configs.empty()) throw EmptyInput("benchmark matrix needs pipelines and configs");

  std::vector<BenchReport> reports;
  for (const auto& [name, stage] : pipelines) {
    for (const auto& cfg : configs) {
      try {
        reports.push_back(measure_fps(name, stage, make_source(cfg), cfg));
      } catch (const BenchAborted& e) {
        BenchReport failed;
        failed.pipeline_name = name;
        failed.config = cfg;
        failed.hardware = hardware_id();
        failed.error = e.what();
        reports.push_back(std::move(failed));
      }
    }
  }
  return reports;
}

void write_bench_csv(std::ostream& out, std::span<const BenchReport> reports) {
  out << "pipeline,batch_size,rep,fps\n";
  for (const auto& r : reports)
    for (std::size_t rep = 0; rep < r.fps_per_rep.size(); ++rep)
      out << r.pipeline_name << ',' << r.config.batch_size << ',' << rep << ','
          << format_double(r.fps_per_rep[rep]) << '\n';
}

void write_bench_summary_csv(std::ostream& out, std::span<const BenchReport> reports) {
  out << "pipeline,batch_size,mean_fps,std_fps,hardware,error\n";
  for (const auto& r : reports) {
    out << r.pipeline_name << ',' << r.config.batch_size << ',';
    if (r.error.empty()) out << format_double(r.mean_fps) << ',' << format_double(r.std_fps);
    else out << ',';
    out << ',' << r.hardware << ',' << r.error << '\n';
  }
}

}  // namespace gazekit
