// Copyright 2026 The factcheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small dense-network toolkit for the task heads: a two-layer GELU MLP with
// hand-written backprop, logit-space losses, AdamW, and a linear
// warmup/decay schedule. Everything is double precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "factcheck/errors.hpp"

namespace factcheck::nn {

// mt19937_64 output is fixed by the standard; the distributions below are
// ours so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

inline double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += (out[i] = std::exp(logits[i] - m));
  for (double& p : out) p /= sum;
  return out;
}

inline double log_sum_exp(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return m + std::log(sum);
}

// -[y log p + (1 - y) log(1 - p)] on a probability.
inline double binary_cross_entropy(double p, double y) {
  const double lp = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  const double lq = p < 1.0 ? std::log1p(-p) : -std::numeric_limits<double>::infinity();
  if (y == 0.0) return -lq;
  if (y == 1.0) return -lp;
  return -(y * lp + (1.0 - y) * lq);
}

// Same loss from the logit, finite for any finite z.
inline double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

// d/dz of bce_with_logits.
inline double bce_with_logits_grad(double z, double y) { return sigmoid(z) - y; }

// -log p[gold] on a distribution.
inline double cross_entropy(std::span<const double> probs, std::size_t gold) {
  return -std::log(probs[gold]);
}

inline double cross_entropy_with_logits(std::span<const double> logits, std::size_t gold) {
  return log_sum_exp(logits) - logits[gold];
}

// First index of the maximum.
inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Linear(in -> hidden), GELU, Linear(hidden -> out). Parameters live in
// one flat buffer: W1 (hidden x in, row-major), b1, W2 (out x hidden), b2.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t in, std::size_t hidden, std::size_t out)
      : in_(in), hidden_(hidden), out_(out), params_(size_for(in, hidden, out), 0.0) {
    if (in == 0 || hidden == 0 || out == 0) throw Error("Mlp dimensions must be positive");
  }

  static std::size_t size_for(std::size_t in, std::size_t hidden, std::size_t out) {
    return hidden * in + hidden + out * hidden + out;
  }

  // Glorot-uniform weights, zero biases.
  void init(Rng& rng) {
    std::fill(params_.begin(), params_.end(), 0.0);
    const double a1 = std::sqrt(6.0 / static_cast<double>(in_ + hidden_));
    for (std::size_t i = 0; i < hidden_ * in_; ++i) params_[i] = rng.uniform(-a1, a1);
    const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_ + out_));
    for (std::size_t i = 0; i < out_ * hidden_; ++i) params_[w2_offset() + i] = rng.uniform(-a2, a2);
  }

  std::size_t in_size() const { return in_; }
  std::size_t hidden_size() const { return hidden_; }
  std::size_t out_size() const { return out_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::size_t b1_offset() const { return hidden_ * in_; }
  std::size_t w2_offset() const { return b1_offset() + hidden_; }
  std::size_t b2_offset() const { return w2_offset() + out_ * hidden_; }

  // Parameters subject to weight decay (the two weight matrices).
  bool is_weight(std::size_t i) const {
    return i < b1_offset() || (i >= w2_offset() && i < b2_offset());
  }

  struct Activations {
    std::vector<double> pre;     // hidden pre-activation
    std::vector<double> hidden;  // gelu(pre)
    std::vector<double> logits;
  };

  Activations forward_cached(std::span<const double> x) const {
    check_input(x);
    Activations a;
    a.pre.resize(hidden_);
    a.hidden.resize(hidden_);
    a.logits.resize(out_);
    const double* w1 = params_.data();
    const double* b1 = params_.data() + b1_offset();
    const double* w2 = params_.data() + w2_offset();
    const double* b2 = params_.data() + b2_offset();
    for (std::size_t h = 0; h < hidden_; ++h) {
      double acc = b1[h];
      const double* row = w1 + h * in_;
      for (std::size_t i = 0; i < in_; ++i) acc += row[i] * x[i];
      a.pre[h] = acc;
      a.hidden[h] = gelu(acc);
    }
    for (std::size_t o = 0; o < out_; ++o) {
      double acc = b2[o];
      const double* row = w2 + o * hidden_;
      for (std::size_t h = 0; h < hidden_; ++h) acc += row[h] * a.hidden[h];
      a.logits[o] = acc;
    }
    return a;
  }

  std::vector<double> forward(std::span<const double> x) const {
    return forward_cached(x).logits;
  }

  // Accumulates dLoss/dparams into grad given dLoss/dlogits.
  void backward(std::span<const double> x, const Activations& a,
                std::span<const double> dlogits, std::vector<double>& grad) const {
    const double* w2 = params_.data() + w2_offset();
    double* gw1 = grad.data();
    double* gb1 = grad.data() + b1_offset();
    double* gw2 = grad.data() + w2_offset();
    double* gb2 = grad.data() + b2_offset();
    std::vector<double> dhidden(hidden_, 0.0);
    for (std::size_t o = 0; o < out_; ++o) {
      const double g = dlogits[o];
      gb2[o] += g;
      for (std::size_t h = 0; h < hidden_; ++h) {
        gw2[o * hidden_ + h] += g * a.hidden[h];
        dhidden[h] += g * w2[o * hidden_ + h];
      }
    }
    for (std::size_t h = 0; h < hidden_; ++h) {
      const double g = dhidden[h] * gelu_grad(a.pre[h]);
      gb1[h] += g;
      double* row = gw1 + h * in_;
      for (std::size_t i = 0; i < in_; ++i) row[i] += g * x[i];
    }
  }

 private:
  void check_input(std::span<const double> x) const {
    if (x.size() != in_) {
      throw Error("Mlp input has size " + std::to_string(x.size()) + ", expected " +
                  std::to_string(in_));
    }
  }

  std::size_t in_ = 0;
  std::size_t hidden_ = 0;
  std::size_t out_ = 0;
  std::vector<double> params_;
};

// Loss policies for train_head / head_loss_and_grad. `Target` is what one
// example carries; `loss` returns the loss and writes dLoss/dlogits.
struct BinaryLogitLoss {
  using Target = double;
  static constexpr std::size_t kOutputs = 1;
  static double loss(std::span<const double> logits, Target y, std::span<double> dlogits) {
    dlogits[0] = bce_with_logits_grad(logits[0], y);
    return bce_with_logits(logits[0], y);
  }
};

struct SoftmaxCrossEntropyLoss {
  using Target = std::size_t;
  static double loss(std::span<const double> logits, Target gold, std::span<double> dlogits) {
    const auto p = softmax(logits);
    for (std::size_t i = 0; i < logits.size(); ++i) dlogits[i] = p[i];
    dlogits[gold] -= 1.0;
    return cross_entropy_with_logits(logits, gold);
  }
};

// Mean loss over a batch and its gradient (same layout as head.params()).
template <typename Loss>
double head_loss_and_grad(const Mlp& head, std::span<const std::vector<double>> inputs,
                          std::span<const typename Loss::Target> targets,
                          std::vector<double>& grad) {
  grad.assign(head.params().size(), 0.0);
  std::vector<double> dlogits(head.out_size());
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto act = head.forward_cached(inputs[i]);
    total += Loss::loss(act.logits, targets[i], dlogits);
    head.backward(inputs[i], act, dlogits, grad);
  }
  const double inv = 1.0 / static_cast<double>(inputs.size());
  for (double& g : grad) g *= inv;
  return total * inv;
}

template <typename Loss>
double head_loss(const Mlp& head, std::span<const std::vector<double>> inputs,
                 std::span<const typename Loss::Target> targets) {
  std::vector<double> dlogits(head.out_size());
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    total += Loss::loss(head.forward(inputs[i]), targets[i], dlogits);
  }
  return total / static_cast<double>(inputs.size());
}

// Linear warmup over the first warmup_steps, then linear decay to zero.
class LinearWarmupSchedule {
 public:
  LinearWarmupSchedule(double base_lr, std::size_t total_steps, double warmup_ratio)
      : base_lr_(base_lr),
        total_(std::max<std::size_t>(total_steps, 1)),
        warmup_(static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_)))) {}

  // Learning rate for the zero-based optimizer step.
  double at(std::size_t step) const {
    if (step < warmup_) {
      return base_lr_ * static_cast<double>(step + 1) / static_cast<double>(warmup_);
    }
    if (step >= total_) return 0.0;
    return base_lr_ * static_cast<double>(total_ - step) / static_cast<double>(total_ - warmup_);
  }

  std::size_t warmup_steps() const { return warmup_; }

 private:
  double base_lr_;
  std::size_t total_;
  std::size_t warmup_;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay; decay applies only where `decay_mask`
// is true.
class AdamW {
 public:
  AdamW(std::size_t n, AdamWConfig cfg = {}) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr,
            const std::vector<bool>& decay_mask) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      if (decay_mask[i]) params[i] -= lr * cfg_.weight_decay * params[i];
      params[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }

  std::size_t steps() const { return t_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

struct OptimConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 8;
  std::size_t epochs = 3;
  double weight_decay = 0.01;
  double warmup_ratio = 0.06;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> dev_metric;
};

// Mini-batch AdamW over precomputed head inputs. After each epoch,
// `dev_metric(head)` (if set) is evaluated; the returned head is the one with
// the best dev metric (earliest on ties), or the last epoch without dev.
template <typename Loss, typename DevMetric, typename OnEpoch>
Mlp train_head(Mlp head, const std::vector<std::vector<double>>& inputs,
               const std::vector<typename Loss::Target>& targets, const OptimConfig& cfg,
               Rng& rng, DevMetric&& dev_metric, OnEpoch&& on_epoch,
               std::vector<EpochStats>* history = nullptr) {
  if (inputs.empty()) throw TrainingError("no training examples");
  if (cfg.batch_size == 0) throw TrainingError("batch_size must be positive");
  if (cfg.epochs == 0) throw TrainingError("epochs must be positive");
  const std::size_t n = inputs.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  LinearWarmupSchedule schedule(cfg.learning_rate, batches * cfg.epochs, cfg.warmup_ratio);
  AdamW opt(head.params().size(), {0.9, 0.999, 1e-8, cfg.weight_decay});
  std::vector<bool> decay(head.params().size());
  for (std::size_t i = 0; i < decay.size(); ++i) decay[i] = head.is_weight(i);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> grad;
  std::vector<std::vector<double>> batch_x;
  std::vector<typename Loss::Target> batch_y;
  Mlp best = head;
  std::optional<double> best_metric;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = lo; i < hi; ++i) {
        batch_x.push_back(inputs[order[i]]);
        batch_y.push_back(targets[order[i]]);
      }
      const double loss = head_loss_and_grad<Loss>(head, batch_x, batch_y, grad);
      epoch_loss += loss * static_cast<double>(hi - lo);
      opt.step(head.params(), grad, schedule.at(opt.steps()), decay);
    }
    EpochStats stats{epoch, epoch_loss / static_cast<double>(n), std::nullopt};
    stats.dev_metric = dev_metric(head);
    if (stats.dev_metric) {
      if (!best_metric || *stats.dev_metric > *best_metric) {
        best_metric = stats.dev_metric;
        best = head;
      }
    } else {
      best = head;
    }
    on_epoch(stats);
    if (history) history->push_back(stats);
  }
  return best;
}

}  // namespace factcheck::nn
