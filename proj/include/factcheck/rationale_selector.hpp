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

// Point-wise evidence scoring: p = sigmoid(MLP(concat of the last k [CLS]
// states)) for each (claim, sentence), trained with binary cross-entropy;
// the evidence is the top-1 sentence.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factcheck/data_model.hpp"
#include "factcheck/encoder.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/nn.hpp"
#include "factcheck/pair_model.hpp"
#include "factcheck/preprocess.hpp"

namespace factcheck {

struct SelectorHyper {
  double learning_rate = 2e-5;
  std::size_t batch_size = 8;
  std::size_t epochs = 3;
  std::size_t k_layers = 3;
  std::size_t head_width = 0;  // 0: backbone hidden size
  double weight_decay = 0.01;
  double warmup_ratio = 0.06;

  // Messages for values outside the tuned grid; such values are allowed.
  std::vector<std::string> grid_warnings() const {
    std::vector<std::string> w;
    if (learning_rate != 5e-6 && learning_rate != 1e-5 && learning_rate != 2e-5) {
      w.push_back("selector learning_rate " + std::to_string(learning_rate) +
                  " outside grid {5e-6, 1e-5, 2e-5}");
    }
    if (batch_size != 8 && batch_size != 16) {
      w.push_back("selector batch_size " + std::to_string(batch_size) + " outside grid {8, 16}");
    }
    if (epochs < 2 || epochs > 4) {
      w.push_back("selector epochs " + std::to_string(epochs) + " outside grid 2..4");
    }
    return w;
  }

  nn::OptimConfig optim() const {
    return {learning_rate, batch_size, epochs, weight_decay, warmup_ratio};
  }
};

class SelectorModel : public PairHeadModel {
 public:
  using PairHeadModel::PairHeadModel;

  // Zero-initialized head of the given width (0: hidden size).
  static SelectorModel create(std::shared_ptr<const EncoderBackend> backend, std::size_t k_layers,
                              std::size_t head_width = 0) {
    check_k_layers(k_layers, *backend);
    const std::size_t in = k_layers * backend->hidden_size();
    const std::size_t width = head_width ? head_width : backend->hidden_size();
    return SelectorModel(std::move(backend), nn::Mlp(in, width, 1), k_layers);
  }

  double logit(std::string_view claim, std::string_view sentence) const {
    return logits(claim, sentence)[0];
  }
};

inline double score(const SelectorModel& model, std::string_view claim, std::string_view sentence) {
  return nn::sigmoid(model.logit(claim, sentence));
}

// Scores for many (claim, sentence) pairs; identical to calling score() on
// each pair.
inline std::vector<double> score_batch(const SelectorModel& model, const std::vector<TextPair>& pairs,
                                       std::size_t workers = 1) {
  const auto feats = encode_features(model.backend(), pairs, model.k_layers(), workers);
  std::vector<double> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(nn::sigmoid(model.head().forward(f)[0]));
  return out;
}

struct Selection {
  std::size_t index = 0;
  double score = 0.0;

  friend bool operator==(const Selection&, const Selection&) = default;
};

// Highest score, ties to the lowest index.
inline Selection top1(std::span<const double> scores) {
  if (scores.empty()) throw Error("select_top1: no candidate sentences");
  const std::size_t i = nn::argmax(scores);
  return {i, scores[i]};
}

inline std::vector<Selection> topk(const std::vector<double>& scores, std::size_t k) {
  if (scores.empty()) throw Error("select_topk: no candidate sentences");
  if (k < 1) throw Error("select_topk: k must be at least 1");
  std::vector<Selection> out;
  for (std::size_t i : top_k_indices(scores, k)) out.push_back({i, scores[i]});
  return out;
}

inline std::vector<double> score_sentences(const SelectorModel& model, std::string_view claim,
                                           const std::vector<Sentence>& sentences,
                                           std::size_t workers = 1) {
  std::vector<TextPair> pairs;
  pairs.reserve(sentences.size());
  for (const Sentence& s : sentences) pairs.push_back({std::string(claim), s.text});
  return score_batch(model, pairs, workers);
}

inline Selection select_top1(const SelectorModel& model, std::string_view claim,
                             const std::vector<Sentence>& sentences) {
  if (sentences.empty()) throw Error("select_top1: no candidate sentences");
  return top1(score_sentences(model, claim, sentences));
}

inline std::vector<Selection> select_topk(const SelectorModel& model, std::string_view claim,
                                          const std::vector<Sentence>& sentences, std::size_t k) {
  if (sentences.empty()) throw Error("select_topk: no candidate sentences");
  return topk(score_sentences(model, claim, sentences), k);
}

// A trained selector as the relevance scorer for NEI example construction.
struct SelectorRelevance {
  const SelectorModel* model;
  std::vector<double> operator()(const std::string& claim,
                                 const std::vector<Sentence>& sentences) const {
    return score_sentences(*model, claim, sentences);
  }
};

struct SelectorDevQuery {
  std::string claim;
  std::vector<std::string> sentences;
  std::size_t gold = 0;
};

// Dev queries for Acc@1: every labeled record that has gold evidence.
inline std::vector<SelectorDevQuery> make_selector_dev(const Dataset& ds) {
  std::vector<SelectorDevQuery> out;
  for (const Record& r : ds.records) {
    if (!r.verdict || !has_evidence(*r.verdict)) continue;
    const auto sentences = segment_sentences(r.corpus);
    SelectorDevQuery q;
    q.claim = normalize(r.claim);
    q.gold = align_or_throw(r, sentences);
    for (const Sentence& s : sentences) q.sentences.push_back(s.text);
    out.push_back(std::move(q));
  }
  return out;
}

struct SelectorTrainResult {
  SelectorModel model;
  std::vector<nn::EpochStats> history;
};

namespace detail {

// Precomputed candidate features of dev queries, so each epoch only reruns
// the head.
struct DevFeatures {
  std::vector<std::vector<Vector>> candidates;
  std::vector<std::size_t> gold;
};

inline DevFeatures precompute_dev(const EncoderBackend& backend, std::size_t k_layers,
                                  const std::vector<SelectorDevQuery>& dev) {
  DevFeatures out;
  for (const auto& q : dev) {
    std::vector<TextPair> pairs;
    for (const auto& s : q.sentences) pairs.push_back({q.claim, s});
    out.candidates.push_back(encode_features(backend, pairs, k_layers));
    out.gold.push_back(q.gold);
  }
  return out;
}

inline double acc_at_1(const nn::Mlp& head, const DevFeatures& dev) {
  std::size_t hits = 0;
  for (std::size_t q = 0; q < dev.candidates.size(); ++q) {
    std::vector<double> logits;
    for (const auto& f : dev.candidates[q]) logits.push_back(head.forward(f)[0]);
    if (nn::argmax(logits) == dev.gold[q]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(dev.candidates.size());
}

}  // namespace detail

// Trains the selector head with mean BCE over shuffled mini-batches. When dev
// queries are given, dev Acc@1 is tracked per epoch and the best epoch's head
// is returned. The encoder stays frozen.
inline SelectorTrainResult train_selector(
    const std::vector<PairExample>& examples, const SelectorHyper& hyper,
    std::shared_ptr<const EncoderBackend> backend, std::uint64_t seed,
    const std::vector<SelectorDevQuery>* dev = nullptr,
    std::function<void(const nn::EpochStats&)> on_epoch = {}, std::size_t workers = 1) {
  std::size_t positives = 0;
  for (const auto& ex : examples) {
    if (ex.label != 0 && ex.label != 1) {
      throw TrainingError("selector label " + std::to_string(ex.label) + " outside {0, 1}");
    }
    positives += static_cast<std::size_t>(ex.label);
  }
  if (positives == 0 || positives == examples.size()) {
    throw TrainingError("selector training data must contain both classes");
  }
  SelectorModel model = SelectorModel::create(backend, hyper.k_layers, hyper.head_width);
  nn::Rng rng(seed);
  model.head().init(rng);

  std::vector<TextPair> pairs;
  std::vector<double> targets;
  pairs.reserve(examples.size());
  for (const auto& ex : examples) {
    pairs.push_back({ex.claim, ex.sentence});
    targets.push_back(static_cast<double>(ex.label));
  }
  const auto inputs = encode_features(*backend, pairs, hyper.k_layers, workers);

  std::optional<detail::DevFeatures> dev_feats;
  if (dev && !dev->empty()) dev_feats = detail::precompute_dev(*backend, hyper.k_layers, *dev);

  SelectorTrainResult result{model, {}};
  result.model.head() = nn::train_head<nn::BinaryLogitLoss>(
      model.head(), inputs, targets, hyper.optim(), rng,
      [&](const nn::Mlp& head) -> std::optional<double> {
        if (!dev_feats) return std::nullopt;
        return detail::acc_at_1(head, *dev_feats);
      },
      [&](const nn::EpochStats& s) {
        if (on_epoch) on_epoch(s);
      },
      &result.history);
  return result;
}

}  // namespace factcheck
