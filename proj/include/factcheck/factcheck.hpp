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

#include "factcheck/backbone.hpp"
#include "factcheck/checkpoint.hpp"
#include "factcheck/data_model.hpp"
#include "factcheck/encoder.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/eval.hpp"
#include "factcheck/nn.hpp"
#include "factcheck/pair_model.hpp"
#include "factcheck/pipeline.hpp"
#include "factcheck/preprocess.hpp"
#include "factcheck/rationale_selector.hpp"
#include "factcheck/text.hpp"
#include "factcheck/toy_backend.hpp"
#include "factcheck/transformer_backend.hpp"
#include "factcheck/verdict_classifier.hpp"
