#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazekit/image.hpp"

namespace gazekit {

struct BenchConfig {
  int batch_size = 1;
  int repetitions = 10;
  int warmup_batches = 10;   // warm-up passes warmup_batches * batch_size frames, untimed
  int frames_per_rep = 100;  // frames timed per repetition
};

struct BenchReport {
  std::string pipeline_name;
  BenchConfig config;
  std::string hardware = "unknown";
  std::vector<double> fps_per_rep;
  double mean_fps = 0.0;
  double std_fps = 0.0;  // population standard deviation
  std::string error;     // non-empty when the cell aborted
};

// Processes a batch of frames; timing covers only these calls.
using BatchStage = std::function<void(std::span<const Image>)>;
// Pull-based frame supply; nullopt means exhausted.
using FrameSource = std::function<std::optional<Image>()>;

// CPU model string from the environment, "unknown" when unavailable.
std::string hardware_id();

// Warm-up (untimed), then `repetitions` timed passes of frames_per_rep
// frames each on a monotonic clock; FPS = frames / elapsed seconds. Stage
// exceptions surface as BenchAborted; an exhausted source is an InvalidInput.
BenchReport measure_fps(const std::string& pipeline_name, const BatchStage& stage,
                        const FrameSource& source, const BenchConfig& cfg);

// Cartesian product of pipelines x configs, run strictly sequentially. A
// fresh FrameSource is created per cell; aborted cells carry their error and
// the remaining cells still run.
std::vector<BenchReport> bench_matrix(
    std::span<const std::pair<std::string, BatchStage>> pipelines,
    std::span<const BenchConfig> configs,
    const std::function<FrameSource(const BenchConfig&)>& make_source);

// `pipeline,batch_size,rep,fps` rows for every repetition.
void write_bench_csv(std::ostream& out, std::span<const BenchReport> reports);
// `pipeline,batch_size,mean_fps,std_fps,hardware,error` summary rows.
void write_bench_summary_csv(std::ostream& out, std::span<const BenchReport> reports);

}  // namespace gazekit
