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

#include <filesystem>

#include "factcheck/pipeline.hpp"
#include "factcheck/synthetic.hpp"

namespace factcheck::testing {

// Toy-backbone pipeline config whose heads fit the synthetic marker data.
inline PipelineConfig toy_config(const std::filesystem::path& out_dir,
                                 const std::filesystem::path& train,
                                 const std::filesystem::path& test,
                                 PipelineMode mode = PipelineMode::kOnePhase) {
  PipelineConfig c;
  c.train_path = train;
  c.test_path = test;
  c.output_dir = out_dir;
  c.mode = mode;
  c.seed = 42;
  c.selector_backbone = {"toy", "", 0};
  c.classifier_backbone = {"toy", "", 0};
  c.selector.learning_rate = 3e-2;
  c.selector.epochs = 30;
  c.selector.k_layers = 3;
  c.selector.head_width = 16;
  c.classifier.learning_rate = 1e-2;
  c.classifier.epochs = 100;
  c.classifier.k_layers = 1;
  c.classifier.head_width = 16;
  return c;
}

}  // namespace factcheck::testing
