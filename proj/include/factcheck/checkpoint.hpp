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

// Head checkpoints. A checkpoint is a directory holding
//   manifest.json  schema version, kind, backbone reference, k_layers,
//                  head shape, label ordering (classifiers), hyperparameters,
//                  seed and per-epoch metric history
//   head.json      the head's flat parameter vector
// Backbone weights are referenced by path, not copied.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "factcheck/backbone.hpp"
#include "factcheck/data_model.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/nn.hpp"
#include "factcheck/rationale_selector.hpp"
#include "factcheck/verdict_classifier.hpp"

namespace factcheck {

inline constexpr int kSchemaVersion = 1;

inline nlohmann::ordered_json backbone_to_json(const BackboneRef& b) {
  return {{"name", b.name}, {"checkpoint", b.checkpoint}, {"max_length", b.max_length}};
}

inline BackboneRef backbone_from_json(const nlohmann::json& j) {
  BackboneRef b;
  b.name = j.value("name", std::string("toy"));
  b.checkpoint = j.value("checkpoint", std::string());
  b.max_length = j.value("max_length", std::size_t{0});
  return b;
}

inline nlohmann::ordered_json history_to_json(const std::vector<nn::EpochStats>& history) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : history) {
    nlohmann::ordered_json e;
    e["epoch"] = s.epoch;
    e["train_loss"] = s.train_loss;
    e["dev_metric"] = s.dev_metric ? nlohmann::ordered_json(*s.dev_metric) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(e));
  }
  return arr;
}

struct CheckpointInfo {
  std::string kind;  // "selector" or "classifier"
  BackboneRef backbone;
  std::size_t k_layers = 0;
  std::optional<ClassifierMode> mode;
  std::uint64_t seed = 0;
  nlohmann::json hyper;
  nlohmann::json history;
};

// Loaded backbones keyed by reference, so models sharing a backbone share
// one instance.
class BackboneCache {
 public:
  std::shared_ptr<const EncoderBackend> get(const BackboneRef& ref) {
    std::lock_guard lock(mu_);
    const std::string key = ref.name + "\n" + ref.checkpoint + "\n" + std::to_string(ref.max_length);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto backend = load_backbone(ref);
    cache_.emplace(key, backend);
    return backend;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const EncoderBackend>> cache_;
};

namespace detail {

inline void save_head_checkpoint(const std::filesystem::path& dir, const PairHeadModel& model,
                                 const BackboneRef& backbone, nlohmann::ordered_json extra,
                                 const nlohmann::ordered_json& hyper, std::uint64_t seed,
                                 const std::vector<nn::EpochStats>& history) {
  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kSchemaVersion;
  for (auto& [k, v] : extra.items()) manifest[k] = v;
  manifest["backbone"] = backbone_to_json(backbone);
  manifest["k_layers"] = model.k_layers();
  manifest["head"] = {{"in", model.head().in_size()},
                      {"hidden", model.head().hidden_size()},
                      {"out", model.head().out_size()}};
  manifest["hyper"] = hyper;
  manifest["seed"] = seed;
  manifest["history"] = history_to_json(history);
  std::filesystem::create_directories(dir);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  nlohmann::ordered_json head;
  head["params"] = model.head().params();
  write_file(dir / "head.json", head.dump() + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw CheckpointError("missing '" + path.string() + "'");
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("'" + path.string() + "': " + e.what());
  }
}

inline std::pair<CheckpointInfo, nn::Mlp> load_head_checkpoint(const std::filesystem::path& dir,
                                                               std::string_view expected_kind) {
  const nlohmann::json manifest = read_json(dir / "manifest.json");
  CheckpointInfo info;
  nn::Mlp head;
  try {
    const int version = manifest.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw CheckpointError("checkpoint '" + dir.string() + "' has schema_version " +
                            std::to_string(version) + ", expected " + std::to_string(kSchemaVersion));
    }
    info.kind = manifest.at("kind").get<std::string>();
    if (info.kind != expected_kind) {
      throw CheckpointError("checkpoint '" + dir.string() + "' is a " + info.kind + ", expected " +
                            std::string(expected_kind));
    }
    info.backbone = backbone_from_json(manifest.at("backbone"));
    info.k_layers = manifest.at("k_layers").get<std::size_t>();
    if (manifest.contains("mode")) info.mode = parse_classifier_mode(manifest["mode"].get<std::string>());
    info.seed = manifest.value("seed", std::uint64_t{0});
    info.hyper = manifest.value("hyper", nlohmann::json::object());
    info.history = manifest.value("history", nlohmann::json::array());
    const auto& shape = manifest.at("head");
    head = nn::Mlp(shape.at("in").get<std::size_t>(), shape.at("hidden").get<std::size_t>(),
                   shape.at("out").get<std::size_t>());
    const nlohmann::json weights = read_json(dir / "head.json");
    auto params = weights.at("params").get<std::vector<double>>();
    if (params.size() != head.params().size()) {
      throw CheckpointError("head.json in '" + dir.string() + "' has " +
                            std::to_string(params.size()) + " parameters, expected " +
                            std::to_string(head.params().size()));
    }
    head.params() = std::move(params);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint '" + dir.string() + "': " + e.what());
  }
  return {std::move(info), std::move(head)};
}

}  // namespace detail

inline nlohmann::ordered_json hyper_to_json(const SelectorHyper& h) {
  return {{"learning_rate", h.learning_rate}, {"batch_size", h.batch_size},
          {"epochs", h.epochs},               {"k_layers", h.k_layers},
          {"head_width", h.head_width},       {"weight_decay", h.weight_decay},
          {"warmup_ratio", h.warmup_ratio}};
}

inline nlohmann::ordered_json hyper_to_json(const ClassifierHyper& h) {
  return {{"learning_rate", h.learning_rate}, {"batch_size", h.batch_size},
          {"epochs", h.epochs},               {"k_layers", h.k_layers},
          {"head_width", h.head_width},       {"weight_decay", h.weight_decay},
          {"warmup_ratio", h.warmup_ratio}};
}

inline void save_selector(const std::filesystem::path& dir, const SelectorModel& model,
                          const BackboneRef& backbone, const SelectorHyper& hyper,
                          std::uint64_t seed, const std::vector<nn::EpochStats>& history = {}) {
  detail::save_head_checkpoint(dir, model, backbone, {{"kind", "selector"}}, hyper_to_json(hyper),
                               seed, history);
}

inline void save_classifier(const std::filesystem::path& dir, const ClassifierModel& model,
                            const BackboneRef& backbone, const ClassifierHyper& hyper,
                            std::uint64_t seed, const std::vector<nn::EpochStats>& history = {}) {
  nlohmann::ordered_json extra;
  extra["kind"] = "classifier";
  extra["mode"] = std::string(to_string(model.mode()));
  extra["labels"] = model.labels();
  detail::save_head_checkpoint(dir, model, backbone, extra, hyper_to_json(hyper), seed, history);
}

inline SelectorModel load_selector(const std::filesystem::path& dir, BackboneCache& cache) {
  auto [info, head] = detail::load_head_checkpoint(dir, "selector");
  return SelectorModel(cache.get(info.backbone), std::move(head), info.k_layers);
}

inline ClassifierModel load_classifier(const std::filesystem::path& dir, BackboneCache& cache) {
  auto [info, head] = detail::load_head_checkpoint(dir, "classifier");
  if (!info.mode) throw CheckpointError("classifier checkpoint '" + dir.string() + "' lacks a mode");
  const nlohmann::json manifest = detail::read_json(dir / "manifest.json");
  const auto labels = manifest.value("labels", std::vector<std::string>{});
  if (labels != mode_labels(*info.mode)) {
    throw CheckpointError("classifier checkpoint '" + dir.string() +
                          "' label ordering does not match mode " +
                          std::string(to_string(*info.mode)));
  }
  return ClassifierModel(cache.get(info.backbone), std::move(head), info.k_layers, *info.mode);
}

inline CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir) {
  const nlohmann::json manifest = detail::read_json(dir / "manifest.json");
  return detail::load_head_checkpoint(dir, manifest.value("kind", std::string())).first;
}

}  // namespace factcheck
