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

// Pair encoders: a (claim, sentence) pair is laid out as
//   [CLS] claim-tokens [SEP] sentence-tokens [SEP]
// and the backend returns the [CLS] hidden state of every encoder layer.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factcheck/errors.hpp"

namespace factcheck {

using Vector = std::vector<double>;

struct LayerEmbeddings {
  std::vector<Vector> layers;  // last layer last

  std::size_t num_layers() const { return layers.size(); }
  std::size_t hidden_size() const { return layers.empty() ? 0 : layers.front().size(); }
  friend bool operator==(const LayerEmbeddings&, const LayerEmbeddings&) = default;
};

// Concatenates the [CLS] vectors of the last k layers, last layer first.
inline Vector pooled_representation(const LayerEmbeddings& emb, std::size_t k) {
  if (k < 1 || k > emb.num_layers()) {
    throw EncoderError("pooled_representation: k=" + std::to_string(k) +
                       " outside [1, " + std::to_string(emb.num_layers()) + "]");
  }
  Vector out;
  out.reserve(k * emb.hidden_size());
  for (std::size_t i = 0; i < k; ++i) {
    const Vector& layer = emb.layers[emb.num_layers() - 1 - i];
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

struct BackboneInfo {
  std::string name;
  std::size_t hidden_size = 0;
  std::size_t num_layers = 0;
  std::size_t max_length = 0;
};

struct TruncatedLengths {
  std::size_t claim = 0;
  std::size_t sentence = 0;
};

// Of max_length - 3 content slots the claim keeps up to ceil(budget / 2),
// the sentence gets the rest; both are cut from the right.
inline TruncatedLengths truncate_pair(std::size_t claim_len, std::size_t sentence_len,
                                      std::size_t max_length) {
  if (max_length <= 3) {
    throw EncoderError("max_length must exceed the 3 special tokens");
  }
  const std::size_t budget = max_length - 3;
  const std::size_t claim_cap = (budget + 1) / 2;
  TruncatedLengths out;
  out.claim = std::min(claim_len, claim_cap);
  out.sentence = std::min(sentence_len, budget - out.claim);
  return out;
}

struct EncodedPair {
  std::vector<std::int64_t> ids;
  std::vector<int> type_ids;
  std::size_t claim_tokens = 0;
  std::size_t sentence_tokens = 0;
};

// Optional word segmentation applied before tokenization (identity when
// unset). PhoBERT-family vocabularies expect word-segmented input.
using PreTokenizer = std::function<std::string(std::string_view)>;

// Backends are immutable once constructed and configured; concurrent
// encode_pair calls on a shared instance are safe.
class EncoderBackend {
 public:
  explicit EncoderBackend(BackboneInfo info) : info_(std::move(info)) {}
  virtual ~EncoderBackend() = default;

  EncoderBackend(const EncoderBackend&) = delete;
  EncoderBackend& operator=(const EncoderBackend&) = delete;

  const BackboneInfo& info() const { return info_; }
  std::size_t hidden_size() const { return info_.hidden_size; }
  std::size_t num_layers() const { return info_.num_layers; }
  std::size_t max_length() const { return info_.max_length; }

  // Must be called before the backend is shared between threads.
  void set_pre_tokenizer(PreTokenizer fn) { pre_tokenizer_ = std::move(fn); }

  std::vector<std::int64_t> tokenize(std::string_view text) const {
    if (pre_tokenizer_) return tokenize_words(pre_tokenizer_(text));
    return tokenize_words(text);
  }

  EncodedPair assemble_pair(std::string_view claim, std::string_view sentence) const {
    const auto claim_ids = tokenize(claim);
    const auto sentence_ids = tokenize(sentence);
    const TruncatedLengths len =
        truncate_pair(claim_ids.size(), sentence_ids.size(), info_.max_length);
    if (len.claim == 0 || len.sentence == 0) {
      throw EncoderError("pair has an empty side after tokenization");
    }
    EncodedPair p;
    p.claim_tokens = len.claim;
    p.sentence_tokens = len.sentence;
    p.ids.reserve(len.claim + len.sentence + 3);
    p.ids.push_back(cls_id());
    p.ids.insert(p.ids.end(), claim_ids.begin(), claim_ids.begin() + len.claim);
    p.ids.push_back(sep_id());
    p.type_ids.assign(p.ids.size(), 0);
    p.ids.insert(p.ids.end(), sentence_ids.begin(), sentence_ids.begin() + len.sentence);
    p.ids.push_back(sep_id());
    p.type_ids.resize(p.ids.size(), 1);
    return p;
  }

  LayerEmbeddings encode_pair(std::string_view claim, std::string_view sentence) const {
    return forward(assemble_pair(claim, sentence));
  }

  virtual LayerEmbeddings forward(const EncodedPair& pair) const = 0;

 protected:
  virtual std::vector<std::int64_t> tokenize_words(std::string_view text) const = 0;
  virtual std::int64_t cls_id() const = 0;
  virtual std::int64_t sep_id() const = 0;

 private:
  BackboneInfo info_;
  PreTokenizer pre_tokenizer_;
};

}  // namespace factcheck
