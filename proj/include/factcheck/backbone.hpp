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

#include <algorithm>
#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "factcheck/encoder.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/toy_backend.hpp"
#include "factcheck/transformer_backend.hpp"

namespace factcheck {

struct BackboneSpec {
  std::string_view name;
  std::size_t hidden_size;
  std::size_t num_layers;
  std::size_t default_max_length;
  std::string_view hub_id;  // upstream checkpoint the exported weights come from
};

inline constexpr std::array<BackboneSpec, 6> kBackbones = {{
    {"toy", ToyBackend::kHiddenSize, ToyBackend::kNumLayers, ToyBackend::kDefaultMaxLength, ""},
    {"phobert", 768, 12, 256, "vinai/phobert-base"},
    {"phobert-large", 1024, 24, 256, "vinai/phobert-large"},
    {"xlm-roberta-large", 1024, 24, 512, "xlm-roberta-large"},
    {"xlm-roberta-large-xnli", 1024, 24, 512, "joeddav/xlm-roberta-large-xnli"},
    {"mbert", 768, 12, 512, "bert-base-multilingual-cased"},
}};

inline const BackboneSpec& backbone_spec(std::string_view name) {
  auto it = std::find_if(kBackbones.begin(), kBackbones.end(),
                         [&](const BackboneSpec& s) { return s.name == name; });
  if (it == kBackbones.end()) throw ConfigError("unknown backbone '" + std::string(name) + "'");
  return *it;
}

// Which encoder to use and where its weights live. max_length 0 selects the
// backbone default.
struct BackboneRef {
  std::string name = "toy";
  std::string checkpoint;
  std::size_t max_length = 0;

  friend bool operator==(const BackboneRef&, const BackboneRef&) = default;
};

inline std::shared_ptr<const EncoderBackend> load_backbone(const BackboneRef& ref) {
  const BackboneSpec& spec = backbone_spec(ref.name);
  const std::size_t max_length = ref.max_length ? ref.max_length : spec.default_max_length;
  if (spec.name == "toy") return std::make_shared<ToyBackend>(max_length);
  if (ref.checkpoint.empty()) {
    throw ConfigError("backbone '" + ref.name + "' needs a checkpoint directory (export " +
                      std::string(spec.hub_id) + " with tools/export_hf_checkpoint.py)");
  }
  auto backend = TransformerBackend::load(ref.checkpoint, ref.name, max_length);
  if (backend->hidden_size() != spec.hidden_size || backend->num_layers() != spec.num_layers) {
    throw CheckpointError("checkpoint '" + ref.checkpoint + "' does not match backbone '" +
                          ref.name + "' (hidden " + std::to_string(backend->hidden_size()) +
                          ", layers " + std::to_string(backend->num_layers()) + ")");
  }
  return backend;
}

}  // namespace factcheck
