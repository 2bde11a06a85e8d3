#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <sstream>

#include "gazekit/bench.hpp"
#include "gazekit/errors.hpp"

using namespace gazekit;

namespace {

// Busy-wait for a precise per-frame latency; sleep-based stages overshoot.
BatchStage spin_stage(std::chrono::microseconds per_frame) {
  return [per_frame](std::span<const Image> batch) {
    auto until = std::chrono::steady_clock::now() + per_frame * batch.size();
    while (std::chrono::steady_clock::now() < until) {
    }
  };
}

FrameSource tiny_frames(std::size_t count) {
  auto remaining = std::make_shared<std::size_t>(count);
  return [remaining]() -> std::optional<Image> {
    if (*remaining == 0) return std::nullopt;
    --*remaining;
    return Image(4, 4, Rgb{1, 2, 3});
  };
}

FrameSource endless_frames() {
  return []() -> std::optional<Image> { return Image(4, 4); };
}

}  // namespace

TEST_CASE("measure_fps: injected 10 ms per frame reads as 100 FPS") {
  BenchConfig cfg;
  cfg.batch_size = 1;
  cfg.repetitions = 10;
  cfg.warmup_batches = 2;
  cfg.frames_per_rep = 5;
  auto report = measure_fps("spin", spin_stage(std::chrono::microseconds(10000)), endless_frames(), cfg);
  REQUIRE(report.fps_per_rep.size() == 10);
  CHECK(report.mean_fps > 90.0);
  CHECK(report.mean_fps < 110.0);
}

TEST_CASE("measure_fps: zero-work stage stays positive and finite") {
  BenchConfig cfg;
  cfg.warmup_batches = 1;
  cfg.frames_per_rep = 16;
  cfg.batch_size = 8;
  auto report = measure_fps("noop", [](std::span<const Image>) {}, endless_frames(), cfg);
  for (double f : report.fps_per_rep) {
    CHECK(f > 0.0);
    CHECK(std::isfinite(f));
  }
}

TEST_CASE("measure_fps: single repetition has zero deviation") {
  BenchConfig cfg;
  cfg.repetitions = 1;
  cfg.warmup_batches = 1;
  cfg.frames_per_rep = 3;
  auto report = measure_fps("one", spin_stage(std::chrono::microseconds(1000)), endless_frames(), cfg);
  REQUIRE(report.fps_per_rep.size() == 1);
  CHECK(report.mean_fps == report.fps_per_rep[0]);
  CHECK(report.std_fps == 0.0);
}

TEST_CASE("measure_fps: warm-up frames never contribute to timing") {
  // Stage is 20x slower during the warm-up calls; if warm-up leaked into the
  // timed section the mean would crater.
  auto calls = std::make_shared<std::atomic<int>>(0);
  const int warmup_frames = 4;
  BatchStage stage = [calls, warmup_frames](std::span<const Image> batch) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      int n = calls->fetch_add(1);
      auto cost = n < warmup_frames ? std::chrono::microseconds(20000) : std::chrono::microseconds(1000);
      auto until = std::chrono::steady_clock::now() + cost;
      while (std::chrono::steady_clock::now() < until) {
      }
    }
  };
  BenchConfig cfg;
  cfg.batch_size = 2;
  cfg.warmup_batches = 2;  // exactly the 4 slow frames
  cfg.repetitions = 5;
  cfg.frames_per_rep = 4;
  auto report = measure_fps("warm", stage, endless_frames(), cfg);
  CHECK(report.mean_fps > 800.0);
  CHECK(report.mean_fps < 1200.0);
}

TEST_CASE("measure_fps: mean equals the mean of reported values exactly") {
  BenchConfig cfg;
  cfg.warmup_batches = 0;
  cfg.repetitions = 7;
  cfg.frames_per_rep = 2;
  auto report = measure_fps("noop", [](std::span<const Image>) {}, endless_frames(), cfg);
  double sum = 0.0;
  for (double f : report.fps_per_rep) sum += f;
  CHECK(report.mean_fps == sum / 7.0);
}

TEST_CASE("measure_fps: rate is measured, not total work") {
  BenchConfig small, large;
  small.warmup_batches = large.warmup_batches = 1;
  small.repetitions = large.repetitions = 3;
  small.frames_per_rep = 10;
  large.frames_per_rep = 20;
  auto a = measure_fps("small", spin_stage(std::chrono::microseconds(2000)), endless_frames(), small);
  auto b = measure_fps("large", spin_stage(std::chrono::microseconds(2000)), endless_frames(), large);
  CHECK(std::abs(a.mean_fps - b.mean_fps) / a.mean_fps < 0.15);
}

TEST_CASE("measure_fps: exhausted source and aborting stage") {
  BenchConfig cfg;
  cfg.warmup_batches = 1;
  cfg.repetitions = 2;
  cfg.frames_per_rep = 10;
  CHECK_THROWS_AS(measure_fps("starved", [](std::span<const Image>) {}, tiny_frames(5), cfg),
                  InvalidInput);

  BatchStage broken = [](std::span<const Image>) { throw std::runtime_error("boom"); };
  CHECK_THROWS_AS(measure_fps("broken", broken, endless_frames(), cfg), BenchAborted);
}

TEST_CASE("bench_matrix: full product, stable order, failures isolated") {
  std::vector<std::pair<std::string, BatchStage>> pipelines;
  pipelines.emplace_back("fast", spin_stage(std::chrono::microseconds(200)));
  pipelines.emplace_back("broken", [](std::span<const Image>) { throw std::runtime_error("dead stage"); });

  std::vector<BenchConfig> cfgs(2);
  cfgs[0].batch_size = 1;
  cfgs[1].batch_size = 8;
  for (auto& c : cfgs) {
    c.warmup_batches = 1;
    c.repetitions = 2;
    c.frames_per_rep = 8;
  }

  auto make_source = [](const BenchConfig&) { return endless_frames(); };
  auto reports = bench_matrix(pipelines, cfgs, make_source);
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].pipeline_name == "fast");
  CHECK(reports[0].config.batch_size == 1);
  CHECK(reports[1].config.batch_size == 8);
  CHECK(reports[2].pipeline_name == "broken");
  CHECK(reports[0].error.empty());
  CHECK_FALSE(reports[2].error.empty());
  CHECK_FALSE(reports[3].error.empty());

  auto again = bench_matrix(pipelines, cfgs, make_source);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(again[i].pipeline_name == reports[i].pipeline_name);
    CHECK(again[i].config.batch_size == reports[i].config.batch_size);
  }

  std::ostringstream csv;
  write_bench_csv(csv, reports);
  CHECK(csv.str().rfind("pipeline,batch_size,rep,fps\nfast,1,0,", 0) == 0);
  std::ostringstream summary;
  write_bench_summary_csv(summary, reports);
  CHECK(summary.str().find("broken,1,,,") != std::string::npos);
}
