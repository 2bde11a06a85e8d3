#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gazekit/classify.hpp"

namespace gazekit {

enum class HeadMode { single_label, multi_label };

// Row-major matrix of doubles; rows = samples for features and targets.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Single affine layer over frozen embeddings. head selects softmax
// cross-entropy (one label per sample) or per-class sigmoid with binary
// cross-entropy (any number of labels per sample).
struct LinearProbe {
  int dim = 0;
  int num_classes = 0;
  HeadMode head = HeadMode::single_label;
  Matrix weights;            // K x d
  std::vector<double> bias;  // K

  static LinearProbe init(int dim, int num_classes, HeadMode head, std::uint64_t seed);
  static LinearProbe load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct TrainConfig {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<int> milestones;  // 0-based epochs at which lr is scaled by gamma
  double gamma = 0.1;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

// Mean loss over the batch (single-label: mean -log p_true; multi-label:
// mean elementwise binary cross-entropy over samples x classes) and its
// analytic gradients. Weight decay is not part of this loss; the trainer
// adds wd*param to the gradient separately.
double probe_loss_gradients(const LinearProbe& probe, const Matrix& features, const Matrix& targets,
                            Matrix* grad_weights, std::vector<double>* grad_bias);

struct TrainResult {
  LinearProbe probe;
  std::vector<double> epoch_loss;
};

// SGD with momentum, gradient-added weight decay, and a multi-step lr
// schedule. Deterministic under cfg.seed (initialization + epoch shuffles).
// Throws DivergenceError with the epoch index when the loss leaves the
// finite range.
TrainResult train_probe(const Matrix& features, const Matrix& targets, HeadMode head,
                        const TrainConfig& cfg);

// single-label: softmax(We+b); multi-label: per-class sigmoid(We+b).
ClassScores probe_scores(const Embedding& e, const LinearProbe& probe);

}  // namespace gazekit
