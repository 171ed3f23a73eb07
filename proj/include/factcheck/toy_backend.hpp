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

// Deterministic, weight-free encoder for tests and smoke runs. Words are
// whitespace-delimited and hashed; at every layer each token adds a signed
// unit into one hashed coordinate (a count sketch, with a different hash per
// layer and per segment), and the layer output is
//   tanh(kSketchGain * sketch_l + M_l * previous_layer)
// with fixed pseudo-random matrices M_l. Word order does not matter.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "factcheck/encoder.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1) from a 64-bit key.
inline double hashed_unit(std::uint64_t key) {
  return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-52 - 1.0;
}

class ToyBackend final : public EncoderBackend {
 public:
  static constexpr std::size_t kHiddenSize = 16;
  static constexpr std::size_t kNumLayers = 4;
  static constexpr std::size_t kDefaultMaxLength = 64;
  static constexpr double kSketchGain = 0.7;
  static constexpr double kMixGain = 0.5;

  explicit ToyBackend(std::size_t max_length = kDefaultMaxLength)
      : EncoderBackend({"toy", kHiddenSize, kNumLayers, max_length}) {
    const double scale = kMixGain * std::sqrt(3.0 / static_cast<double>(kHiddenSize));
    for (std::size_t l = 0; l < kNumLayers; ++l) {
      for (std::size_t i = 0; i < kHiddenSize * kHiddenSize; ++i) {
        mix_[l][i] = scale * hashed_unit(key(0x313aULL, l, i));
      }
    }
  }

  LayerEmbeddings forward(const EncodedPair& pair) const override {
    constexpr std::size_t H = kHiddenSize;
    LayerEmbeddings out;
    out.layers.reserve(kNumLayers);
    Vector prev(H, 0.0);
    for (std::size_t l = 0; l < kNumLayers; ++l) {
      double sketch[H] = {};
      for (std::size_t t = 0; t < pair.ids.size(); ++t) {
        const std::uint64_t h =
            splitmix64(key(static_cast<std::uint64_t>(pair.ids[t]), l,
                           static_cast<std::uint64_t>(pair.type_ids[t])));
        sketch[h % H] += ((h >> 32) & 1) ? 1.0 : -1.0;
      }
      Vector cur(H);
      for (std::size_t i = 0; i < H; ++i) {
        double acc = kSketchGain * sketch[i];
        for (std::size_t j = 0; j < H; ++j) acc += mix_[l][i * H + j] * prev[j];
        cur[i] = std::tanh(acc);
      }
      out.layers.push_back(cur);
      prev = std::move(cur);
    }
    return out;
  }

 protected:
  std::vector<std::int64_t> tokenize_words(std::string_view s) const override {
    std::vector<std::int64_t> ids;
    for (const auto& w : text::split_whitespace(s)) {
      ids.push_back(std::bit_cast<std::int64_t>(text::fnv1a64(w)));
    }
    return ids;
  }
  std::int64_t cls_id() const override {
    return std::bit_cast<std::int64_t>(text::fnv1a64("[CLS]"));
  }
  std::int64_t sep_id() const override {
    return std::bit_cast<std::int64_t>(text::fnv1a64("[SEP]"));
  }

 private:
  static std::uint64_t key(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(base ^ (a * 0x632BE59BD9B4E019ULL)) + b);
  }

  double mix_[kNumLayers][kHiddenSize * kHiddenSize];
};

}  // namespace factcheck
