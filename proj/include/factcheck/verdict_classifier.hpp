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

// Verdict classification over (claim, evidence): either one 3-way softmax
// head, or a cascade of RELEVANT/N-RELEVANT then SUPPORTED/REFUTED where
// N-RELEVANT short-circuits to NEI.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factcheck/data_model.hpp"
#include "factcheck/encoder.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/nn.hpp"
#include "factcheck/pair_model.hpp"
#include "factcheck/preprocess.hpp"

namespace factcheck {

enum class ClassifierMode { kOnePhase, kStage1, kStage2 };

inline std::string_view to_string(ClassifierMode m) {
  switch (m) {
    case ClassifierMode::kOnePhase: return "one_phase";
    case ClassifierMode::kStage1: return "stage1";
    case ClassifierMode::kStage2: return "stage2";
  }
  return "one_phase";
}

inline ClassifierMode parse_classifier_mode(std::string_view s) {
  for (auto m : {ClassifierMode::kOnePhase, ClassifierMode::kStage1, ClassifierMode::kStage2}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown classifier mode '" + std::string(s) + "'");
}

// Output ordering of each mode's head. Ties resolve to the earlier label.
inline const std::vector<std::string>& mode_labels(ClassifierMode m) {
  static const std::vector<std::string> one_phase = {"SUPPORTED", "REFUTED", "NEI"};
  static const std::vector<std::string> stage1 = {"RELEVANT", "N-RELEVANT"};
  static const std::vector<std::string> stage2 = {"SUPPORTED", "REFUTED"};
  switch (m) {
    case ClassifierMode::kOnePhase: return one_phase;
    case ClassifierMode::kStage1: return stage1;
    case ClassifierMode::kStage2: return stage2;
  }
  return one_phase;
}

inline constexpr int kRelevant = 0;
inline constexpr int kNotRelevant = 1;

// Maps verdict-labeled examples (see verdict_label) onto a mode's label
// set: stage1 folds SUPPORTED/REFUTED into RELEVANT and NEI into N-RELEVANT;
// stage2 drops NEI.
inline std::vector<PairExample> relabel_for_mode(const std::vector<PairExample>& examples,
                                                 ClassifierMode mode) {
  std::vector<PairExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    if (ex.label < 0 || ex.label > 2) {
      throw TrainingError("verdict label " + std::to_string(ex.label) + " outside {0, 1, 2}");
    }
    const auto v = static_cast<Verdict>(ex.label);
    switch (mode) {
      case ClassifierMode::kOnePhase:
        out.push_back(ex);
        break;
      case ClassifierMode::kStage1:
        out.push_back({ex.claim, ex.sentence, has_evidence(v) ? kRelevant : kNotRelevant});
        break;
      case ClassifierMode::kStage2:
        if (has_evidence(v)) out.push_back(ex);
        break;
    }
  }
  return out;
}

struct ClassifierHyper {
  double learning_rate = 1e-5;
  std::size_t batch_size = 8;
  std::size_t epochs = 4;
  std::size_t k_layers = 1;
  std::size_t head_width = 0;  // 0: backbone hidden size
  double weight_decay = 0.01;
  double warmup_ratio = 0.06;

  std::vector<std::string> grid_warnings() const {
    std::vector<std::string> w;
    if (learning_rate != 5e-6 && learning_rate != 1e-5) {
      w.push_back("classifier learning_rate " + std::to_string(learning_rate) +
                  " outside grid {5e-6, 1e-5}");
    }
    if (batch_size != 4 && batch_size != 8) {
      w.push_back("classifier batch_size " + std::to_string(batch_size) + " outside grid {4, 8}");
    }
    if (epochs < 3 || epochs > 4) {
      w.push_back("classifier epochs " + std::to_string(epochs) + " outside grid 3..4");
    }
    return w;
  }

  nn::OptimConfig optim() const {
    return {learning_rate, batch_size, epochs, weight_decay, warmup_ratio};
  }
};

class ClassifierModel : public PairHeadModel {
 public:
  ClassifierModel(std::shared_ptr<const EncoderBackend> backend, nn::Mlp head, std::size_t k_layers,
                  ClassifierMode mode)
      : PairHeadModel(std::move(backend), std::move(head), k_layers), mode_(mode) {
    if (this->head().out_size() != mode_labels(mode).size()) {
      throw ConfigError("classifier head has " + std::to_string(this->head().out_size()) +
                        " outputs, mode " + std::string(to_string(mode)) + " needs " +
                        std::to_string(mode_labels(mode).size()));
    }
  }

  static ClassifierModel create(std::shared_ptr<const EncoderBackend> backend, ClassifierMode mode,
                                std::size_t k_layers = 1, std::size_t head_width = 0) {
    check_k_layers(k_layers, *backend);
    const std::size_t in = k_layers * backend->hidden_size();
    const std::size_t width = head_width ? head_width : backend->hidden_size();
    return ClassifierModel(std::move(backend), nn::Mlp(in, width, mode_labels(mode).size()),
                           k_layers, mode);
  }

  ClassifierMode mode() const { return mode_; }
  const std::vector<std::string>& labels() const { return mode_labels(mode_); }

  std::vector<double> distribution(std::string_view claim, std::string_view evidence) const {
    return nn::softmax(logits(claim, evidence));
  }

  std::size_t predict_label(std::string_view claim, std::string_view evidence) const {
    return nn::argmax(distribution(claim, evidence));
  }

 private:
  ClassifierMode mode_;
};

struct VerdictDistribution {
  std::array<double, 3> probs{};  // SUPPORTED, REFUTED, NEI
  Verdict verdict = Verdict::kNei;
};

inline VerdictDistribution verdict_from_logits(std::span<const double> logits) {
  const auto p = nn::softmax(logits);
  VerdictDistribution out;
  for (std::size_t i = 0; i < 3; ++i) out.probs[i] = p[i];
  out.verdict = static_cast<Verdict>(nn::argmax(p));
  return out;
}

inline VerdictDistribution classify_1phase(const ClassifierModel& model, std::string_view claim,
                                           std::string_view evidence) {
  if (model.mode() != ClassifierMode::kOnePhase) {
    throw ConfigError("classify_1phase needs a one_phase model");
  }
  return verdict_from_logits(model.logits(claim, evidence));
}

// Two independently trained heads; stage2 only runs when stage1 says
// RELEVANT.
struct CascadeModel {
  ClassifierModel stage1;
  ClassifierModel stage2;

  CascadeModel(ClassifierModel s1, ClassifierModel s2) : stage1(std::move(s1)), stage2(std::move(s2)) {
    if (stage1.mode() != ClassifierMode::kStage1 || stage2.mode() != ClassifierMode::kStage2) {
      throw ConfigError("cascade needs a stage1 and a stage2 model");
    }
  }
};

inline Verdict cascade_verdict(std::span<const double> stage1_logits,
                               const std::function<std::vector<double>()>& stage2_logits) {
  if (nn::argmax(nn::softmax(stage1_logits)) == static_cast<std::size_t>(kNotRelevant)) {
    return Verdict::kNei;
  }
  const auto p2 = nn::softmax(stage2_logits());
  return nn::argmax(p2) == 0 ? Verdict::kSupported : Verdict::kRefuted;
}

inline Verdict classify_2phase(const CascadeModel& model, std::string_view claim,
                               std::string_view evidence) {
  return cascade_verdict(model.stage1.logits(claim, evidence),
                         [&] { return model.stage2.logits(claim, evidence); });
}

struct ClassifierTrainResult {
  ClassifierModel model;
  std::vector<nn::EpochStats> history;
};

inline double label_accuracy(const nn::Mlp& head, const std::vector<Vector>& inputs,
                             const std::vector<std::size_t>& gold) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (nn::argmax(head.forward(inputs[i])) == gold[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.size());
}

// Trains a head with mean softmax cross-entropy. Example labels must already
// be in the mode's label set (see relabel_for_mode). With dev examples the
// best-dev-accuracy epoch is returned.
inline ClassifierTrainResult train_classifier(
    const std::vector<PairExample>& examples, const ClassifierHyper& hyper,
    std::shared_ptr<const EncoderBackend> backend, ClassifierMode mode, std::uint64_t seed,
    const std::vector<PairExample>* dev = nullptr,
    std::function<void(const nn::EpochStats&)> on_epoch = {}, std::size_t workers = 1) {
  const std::size_t num_labels = mode_labels(mode).size();
  auto check_labels = [&](const std::vector<PairExample>& xs, std::vector<std::size_t>& targets) {
    std::vector<std::size_t> counts(num_labels, 0);
    for (const auto& ex : xs) {
      if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= num_labels) {
        throw TrainingError("label " + std::to_string(ex.label) + " outside the " +
                            std::string(to_string(mode)) + " label set");
      }
      ++counts[static_cast<std::size_t>(ex.label)];
      targets.push_back(static_cast<std::size_t>(ex.label));
    }
    return counts;
  };
  std::vector<std::size_t> targets;
  const auto counts = check_labels(examples, targets);
  std::size_t present = 0;
  for (auto c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) throw TrainingError("classifier training data must contain at least two classes");

  ClassifierModel model = ClassifierModel::create(backend, mode, hyper.k_layers, hyper.head_width);
  nn::Rng rng(seed);
  model.head().init(rng);

  auto to_pairs = [](const std::vector<PairExample>& xs) {
    std::vector<TextPair> pairs;
    pairs.reserve(xs.size());
    for (const auto& ex : xs) pairs.push_back({ex.claim, ex.sentence});
    return pairs;
  };
  const auto inputs = encode_features(*backend, to_pairs(examples), hyper.k_layers, workers);

  std::vector<Vector> dev_inputs;
  std::vector<std::size_t> dev_targets;
  if (dev && !dev->empty()) {
    check_labels(*dev, dev_targets);
    dev_inputs = encode_features(*backend, to_pairs(*dev), hyper.k_layers, workers);
  }

  ClassifierTrainResult result{model, {}};
  result.model.head() = nn::train_head<nn::SoftmaxCrossEntropyLoss>(
      model.head(), inputs, targets, hyper.optim(), rng,
      [&](const nn::Mlp& head) -> std::optional<double> {
        if (dev_inputs.empty()) return std::nullopt;
        return label_accuracy(head, dev_inputs, dev_targets);
      },
      [&](const nn::EpochStats& s) {
        if (on_epoch) on_epoch(s);
      },
      &result.history);
  return result;
}

}  // namespace factcheck
