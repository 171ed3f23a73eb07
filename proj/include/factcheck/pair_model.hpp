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

// An encoder backend plus a dense head over pooled [CLS] features. Shared by
// the rationale selector and the verdict classifier.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "factcheck/encoder.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/nn.hpp"

namespace factcheck {

struct TextPair {
  std::string first;
  std::string second;
};

// Pooled features for many pairs. Work is split into contiguous chunks over
// `workers` threads; output order always matches input order.
inline std::vector<Vector> encode_features(const EncoderBackend& backend,
                                           const std::vector<TextPair>& pairs,
                                           std::size_t k_layers, std::size_t workers = 1) {
  std::vector<Vector> out(pairs.size());
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      out[i] = pooled_representation(backend.encode_pair(pairs[i].first, pairs[i].second), k_layers);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, pairs.size()));
  if (workers == 1) {
    run(0, pairs.size());
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (pairs.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(pairs.size(), lo + chunk);
      threads.emplace_back([&, w, lo, hi] {
        try {
          run(lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline void check_k_layers(std::size_t k_layers, const EncoderBackend& backend) {
  if (k_layers < 1 || k_layers > backend.num_layers()) {
    throw ConfigError("k_layers=" + std::to_string(k_layers) + " outside [1, " +
                      std::to_string(backend.num_layers()) + "]");
  }
}

class PairHeadModel {
 public:
  PairHeadModel(std::shared_ptr<const EncoderBackend> backend, nn::Mlp head, std::size_t k_layers)
      : backend_(std::move(backend)), head_(std::move(head)), k_layers_(k_layers) {
    if (!backend_) throw Error("model needs an encoder backend");
    check_k_layers(k_layers_, *backend_);
    if (head_.in_size() != feature_size()) {
      throw ConfigError("head input size " + std::to_string(head_.in_size()) +
                        " does not match k_layers * hidden_size = " +
                        std::to_string(feature_size()));
    }
  }

  const EncoderBackend& backend() const { return *backend_; }
  const std::shared_ptr<const EncoderBackend>& backend_ptr() const { return backend_; }
  const nn::Mlp& head() const { return head_; }
  nn::Mlp& head() { return head_; }
  std::size_t k_layers() const { return k_layers_; }
  std::size_t feature_size() const { return k_layers_ * backend_->hidden_size(); }

  Vector features(std::string_view first, std::string_view second) const {
    return pooled_representation(backend_->encode_pair(first, second), k_layers_);
  }

  std::vector<double> logits(std::string_view first, std::string_view second) const {
    return head_.forward(features(first, second));
  }

 private:
  std::shared_ptr<const EncoderBackend> backend_;
  nn::Mlp head_;
  std::size_t k_layers_;
};

}  // namespace factcheck
