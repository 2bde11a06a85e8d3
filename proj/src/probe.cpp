#include "gazekit/probe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "gazekit/errors.hpp"
#include "gazekit/rng.hpp"

namespace gazekit {

namespace {

void affine(const LinearProbe& probe, const double* x, double* z) {
  for (int k = 0; k < probe.num_classes; ++k) {
    const double* w = probe.weights.data.data() + static_cast<std::size_t>(k) * probe.dim;
    double acc = probe.bias[static_cast<std::size_t>(k)];
    for (int j = 0; j < probe.dim; ++j) acc += w[j] * x[j];
    z[k] = acc;
  }
}

// log(1 + exp(-|z|)) without overflow.
double softplus_neg_abs(double z) { return std::log1p(std::exp(-std::abs(z))); }

void write_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated probe file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

LinearProbe LinearProbe::init(int dim, int num_classes, HeadMode head, std::uint64_t seed) {
  if (dim < 1 || num_classes < 1) throw InvalidSize("probe dimensions must be positive");
  LinearProbe probe;
  probe.dim = dim;
  probe.num_classes = num_classes;
  probe.head = head;
  probe.weights = Matrix(static_cast<std::size_t>(num_classes), static_cast<std::size_t>(dim));
  probe.bias.assign(static_cast<std::size_t>(num_classes), 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(Rng::mix(seed, 0x70726f6265ULL));
  for (auto& w : probe.weights.data) w = (rng.next_double() * 2.0 - 1.0) * bound;
  for (auto& b : probe.bias) b = (rng.next_double() * 2.0 - 1.0) * bound;
  return probe;
}

double probe_loss_gradients(const LinearProbe& probe, const Matrix& features, const Matrix& targets,
                            Matrix* grad_weights, std::vector<double>* grad_bias) {
  const std::size_t n = features.rows;
  const std::size_t d = static_cast<std::size_t>(probe.dim);
  const std::size_t K = static_cast<std::size_t>(probe.num_classes);
  if (n == 0) throw EmptyInput("no samples");
  if (features.cols != d) throw ShapeError("feature dimension does not match probe");
  if (targets.rows != n || targets.cols != K) throw ShapeError("target matrix shape mismatch");

  if (grad_weights) *grad_weights = Matrix(K, d);
  if (grad_bias) grad_bias->assign(K, 0.0);

  std::vector<double> z(K), dz(K);
  double loss = 0.0;
  // Denominator of the mean: samples for softmax CE, samples*classes for BCE.
  const double scale =
      probe.head == HeadMode::single_label ? 1.0 / static_cast<double>(n) : 1.0 / (static_cast<double>(n) * K);

  for (std::size_t i = 0; i < n; ++i) {
    const double* x = features.data.data() + i * d;
    const double* y = targets.data.data() + i * K;
    affine(probe, x, z.data());

    if (probe.head == HeadMode::single_label) {
      double m = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += std::exp(z[k] - m);
      double log_sum = m + std::log(sum);
      for (std::size_t k = 0; k < K; ++k) {
        double p = std::exp(z[k] - log_sum);
        loss += y[k] * (log_sum - z[k]) * scale;
        dz[k] = (p - y[k]) * scale;
      }
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        // max(z,0) - z*y + log(1+exp(-|z|))
        loss += (std::max(z[k], 0.0) - z[k] * y[k] + softplus_neg_abs(z[k])) * scale;
        double sig = 1.0 / (1.0 + std::exp(-z[k]));
        dz[k] = (sig - y[k]) * scale;
      }
    }

    if (grad_weights) {
      for (std::size_t k = 0; k < K; ++k) {
        double* gw = grad_weights->data.data() + k * d;
        const double g = dz[k];
        for (std::size_t j = 0; j < d; ++j) gw[j] += g * x[j];
      }
    }
    if (grad_bias)
      for (std::size_t k = 0; k < K; ++k) (*grad_bias)[k] += dz[k];
  }
  return loss;
}

TrainResult train_probe(const Matrix& features, const Matrix& targets, HeadMode head,
                        const TrainConfig& cfg) {
  const std::size_t n = features.rows;
  if (n == 0) throw EmptyInput("no training samples");
  if (targets.rows != n) throw ShapeError("feature and target row counts differ");
  if (!(cfg.lr > 0.0) && cfg.lr != 0.0) throw InvalidInput("learning rate must be non-negative");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw InvalidInput("momentum must lie in [0,1)");
  if (cfg.batch_size < 1) throw InvalidInput("batch size must be positive");
  if (cfg.epochs < 0) throw InvalidInput("epoch count must be non-negative");

  const int d = static_cast<int>(features.cols);
  const int K = static_cast<int>(targets.cols);
  if (head == HeadMode::single_label) {
    for (std::size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (int k = 0; k < K; ++k) row_sum += targets.at(i, static_cast<std::size_t>(k));
      if (row_sum != 1.0) throw InvalidInput("single-label targets must be one-hot rows");
    }
  }

  TrainResult result;
  result.probe = LinearProbe::init(d, K, head, cfg.seed);
  LinearProbe& probe = result.probe;

  std::vector<int> milestones = cfg.milestones;
  std::sort(milestones.begin(), milestones.end());

  Matrix vel_w(static_cast<std::size_t>(K), static_cast<std::size_t>(d));
  std::vector<double> vel_b(static_cast<std::size_t>(K), 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Matrix batch_x, batch_y, grad_w;
  std::vector<double> grad_b;

  double lr = cfg.lr;
  std::size_t next_milestone = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    while (next_milestone < milestones.size() && milestones[next_milestone] <= epoch) {
      lr *= cfg.gamma;
      ++next_milestone;
    }

    Rng rng(Rng::mix(cfg.seed, 0x65706f6368ULL + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t count = std::min(static_cast<std::size_t>(cfg.batch_size), n - start);
      batch_x = Matrix(count, static_cast<std::size_t>(d));
      batch_y = Matrix(count, static_cast<std::size_t>(K));
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t src = order[start + i];
        std::copy_n(features.data.data() + src * d, d, batch_x.data.data() + i * d);
        std::copy_n(targets.data.data() + src * K, K, batch_y.data.data() + i * K);
      }

      double loss = probe_loss_gradients(probe, batch_x, batch_y, &grad_w, &grad_b);
      if (!std::isfinite(loss)) throw DivergenceError("training loss is not finite", epoch);
      epoch_loss += loss * static_cast<double>(count);

      for (std::size_t j = 0; j < grad_w.data.size(); ++j) {
        double g = grad_w.data[j] + cfg.weight_decay * probe.weights.data[j];
        vel_w.data[j] = cfg.momentum * vel_w.data[j] + g;
        probe.weights.data[j] -= lr * vel_w.data[j];
      }
      for (std::size_t k = 0; k < grad_b.size(); ++k) {
        double g = grad_b[k] + cfg.weight_decay * probe.bias[k];
        vel_b[k] = cfg.momentum * vel_b[k] + g;
        probe.bias[k] -= lr * vel_b[k];
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

ClassScores probe_scores(const Embedding& e, const LinearProbe& probe) {
  if (e.dim() != probe.dim) throw ShapeError("embedding dimension does not match probe");
  std::vector<double> z(static_cast<std::size_t>(probe.num_classes));
  affine(probe, e.values.data(), z.data());

  ClassScores scores;
  if (probe.head == HeadMode::single_label) {
    scores.kind = ScoreKind::single_label;
    double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    scores.probs.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      scores.probs[k] = std::exp(z[k] - m);
      sum += scores.probs[k];
    }
    for (auto& p : scores.probs) p /= sum;
  } else {
    scores.kind = ScoreKind::multi_label;
    scores.probs.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) scores.probs[k] = 1.0 / (1.0 + std::exp(-z[k]));
  }
  return scores;
}

LinearProbe LinearProbe::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open probe file: " + path.string());
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, "GZKPROB1", 8) != 0) throw FormatError("bad probe file magic");
  std::uint32_t version = read_u32_le(in);
  if (version != 1) throw FormatError("unsupported probe version");
  std::uint32_t d = read_u32_le(in);
  std::uint32_t K = read_u32_le(in);
  std::uint32_t head = read_u32_le(in);
  if (head > 1) throw FormatError("unknown probe head mode");

  LinearProbe probe;
  probe.dim = static_cast<int>(d);
  probe.num_classes = static_cast<int>(K);
  probe.head = head == 0 ? HeadMode::single_label : HeadMode::multi_label;
  probe.weights = Matrix(K, d);
  probe.bias.resize(K);
  for (auto& w : probe.weights.data) w = std::bit_cast<float>(read_u32_le(in));
  for (auto& b : probe.bias) b = std::bit_cast<float>(read_u32_le(in));
  return probe;
}

void LinearProbe::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create probe file: " + path.string());
  out.write("GZKPROB1", 8);
  write_u32_le(out, 1);
  write_u32_le(out, static_cast<std::uint32_t>(dim));
  write_u32_le(out, static_cast<std::uint32_t>(num_classes));
  write_u32_le(out, head == HeadMode::single_label ? 0 : 1);
  for (double w : weights.data)
    write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(w)));
  for (double b : bias) write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(b)));
  if (!out) throw IoError("failed writing probe file: " + path.string());
}

}  // namespace gazekit
