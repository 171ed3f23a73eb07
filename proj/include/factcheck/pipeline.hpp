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

// Configuration and staged orchestration of the full pipeline:
//
//   preprocess        dataset -> selector pair examples (jsonl)
//   train-selector    selector examples -> selector checkpoint
//   build-nei         dataset + selector -> classifier pair examples
//   train-classifier  classifier examples -> one_phase or stage1/stage2
//   predict           dataset -> predictions.json (+ failures.json)
//   evaluate          predictions + gold -> report.json / report.txt
//
// All artifacts live under the configured output directory.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "factcheck/backbone.hpp"
#include "factcheck/checkpoint.hpp"
#include "factcheck/data_model.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/eval.hpp"
#include "factcheck/preprocess.hpp"
#include "factcheck/rationale_selector.hpp"
#include "factcheck/verdict_classifier.hpp"

namespace factcheck {

enum class PipelineMode { kOnePhase, kTwoPhase };

inline std::string_view to_string(PipelineMode m) {
  return m == PipelineMode::kOnePhase ? "one_phase" : "two_phase";
}

struct PipelineConfig {
  int schema_version = kSchemaVersion;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;
  PipelineMode mode = PipelineMode::kOnePhase;
  std::size_t nei_top_k = 2;
  std::string nei_scorer = "selector";  // "selector" or "tfidf"
  std::size_t workers = 1;
  BackboneRef selector_backbone{"phobert", "", 0};
  SelectorHyper selector;
  BackboneRef classifier_backbone{"xlm-roberta-large-xnli", "", 0};
  ClassifierHyper classifier;
};

// The documented configuration schema with every key at its default.
inline nlohmann::ordered_json default_config_json() {
  const PipelineConfig d;
  auto section = [](const BackboneRef& b, const auto& h) {
    return nlohmann::ordered_json{
        {"backbone", b.name},          {"backbone_checkpoint", b.checkpoint},
        {"max_length", b.max_length},  {"k_layers", h.k_layers},
        {"head_width", h.head_width},  {"learning_rate", h.learning_rate},
        {"batch_size", h.batch_size},  {"epochs", h.epochs},
        {"weight_decay", h.weight_decay}, {"warmup_ratio", h.warmup_ratio}};
  };
  nlohmann::ordered_json j;
  j["schema_version"] = d.schema_version;
  j["data"] = {{"train", ""}, {"dev", ""}, {"test", ""}};
  j["output_dir"] = d.output_dir.string();
  j["seed"] = d.seed;
  j["mode"] = std::string(to_string(d.mode));
  j["nei_top_k"] = d.nei_top_k;
  j["nei_scorer"] = d.nei_scorer;
  j["workers"] = d.workers;
  j["selector"] = section(d.selector_backbone, d.selector);
  j["classifier"] = section(d.classifier_backbone, d.classifier);
  return j;
}

namespace detail {

inline void check_known_keys(const nlohmann::json& doc, const nlohmann::ordered_json& schema,
                             const std::string& prefix) {
  for (const auto& [key, value] : doc.items()) {
    if (!schema.contains(key)) throw ConfigError("unknown config key '" + prefix + key + "'");
    if (value.is_object()) {
      if (!schema[key].is_object()) throw ConfigError("config key '" + prefix + key + "' is not a section");
      check_known_keys(value, schema[key], prefix + key + ".");
    }
  }
}

inline std::string resolve_alias(std::string_view key) {
  if (key == "backbone.selector") return "selector.backbone";
  if (key == "backbone.classifier") return "classifier.backbone";
  if (key == "output-dir") return "output_dir";
  return std::string(key);
}

}  // namespace detail

// Sets a dotted key ("selector.learning_rate") in a config document. The
// value is read as JSON when it parses, otherwise as a string.
inline void apply_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view value) {
  const std::string key = detail::resolve_alias(dotted_key);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = std::string(value);
  }
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      break;
    }
    node = &(*node)[part];
    if (!node->is_object()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

// Relative paths are resolved against base_dir.
inline PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const auto schema = default_config_json();
  detail::check_known_keys(doc, schema, "");
  nlohmann::json merged = schema;
  merged.merge_patch(doc);

  auto path_of = [&](const nlohmann::json& v) -> std::filesystem::path {
    const auto s = v.get<std::string>();
    if (s.empty()) return {};
    std::filesystem::path p(s);
    return (p.is_relative() && !base_dir.empty() ? base_dir / p : p).lexically_normal();
  };
  PipelineConfig c;
  try {
    c.schema_version = merged.at("schema_version").get<int>();
    if (c.schema_version != kSchemaVersion) {
      throw ConfigError("config schema_version " + std::to_string(c.schema_version) +
                        " unsupported (expected " + std::to_string(kSchemaVersion) + ")");
    }
    c.train_path = path_of(merged["data"]["train"]);
    c.dev_path = path_of(merged["data"]["dev"]);
    c.test_path = path_of(merged["data"]["test"]);
    c.output_dir = path_of(merged["output_dir"]);
    if (c.output_dir.empty()) throw ConfigError("output_dir must be set");
    c.seed = merged.at("seed").get<std::uint64_t>();
    const auto mode = merged.at("mode").get<std::string>();
    if (mode == "one_phase") {
      c.mode = PipelineMode::kOnePhase;
    } else if (mode == "two_phase") {
      c.mode = PipelineMode::kTwoPhase;
    } else {
      throw ConfigError("mode must be one_phase or two_phase, got '" + mode + "'");
    }
    c.nei_top_k = merged.at("nei_top_k").get<std::size_t>();
    if (c.nei_top_k < 1) throw ConfigError("nei_top_k must be at least 1");
    c.nei_scorer = merged.at("nei_scorer").get<std::string>();
    if (c.nei_scorer != "selector" && c.nei_scorer != "tfidf") {
      throw ConfigError("nei_scorer must be 'selector' or 'tfidf'");
    }
    c.workers = std::max<std::size_t>(1, merged.at("workers").get<std::size_t>());
    auto read_section = [&](const nlohmann::json& s, BackboneRef& b, auto& h) {
      b.name = s.at("backbone").get<std::string>();
      backbone_spec(b.name);
      b.checkpoint = path_of(s.at("backbone_checkpoint")).string();
      b.max_length = s.at("max_length").get<std::size_t>();
      h.k_layers = s.at("k_layers").get<std::size_t>();
      h.head_width = s.at("head_width").get<std::size_t>();
      h.learning_rate = s.at("learning_rate").get<double>();
      h.batch_size = s.at("batch_size").get<std::size_t>();
      h.epochs = s.at("epochs").get<std::size_t>();
      h.weight_decay = s.at("weight_decay").get<double>();
      h.warmup_ratio = s.at("warmup_ratio").get<double>();
      if (h.learning_rate <= 0 || h.batch_size == 0 || h.epochs == 0 || h.k_layers == 0) {
        throw ConfigError("learning_rate, batch_size, epochs and k_layers must be positive");
      }
    };
    read_section(merged.at("selector"), c.selector_backbone, c.selector);
    read_section(merged.at("classifier"), c.classifier_backbone, c.classifier);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::json read_config_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' not found");
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

inline PipelineConfig load_config(const std::filesystem::path& path,
                                  const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  nlohmann::json doc = read_config_json(path);
  for (const auto& [k, v] : overrides) apply_override(doc, k, v);
  return parse_config(doc, path.parent_path());
}

// Where each stage reads and writes under output_dir.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path selector_examples(std::string_view split) const {
    return root / ("selector." + std::string(split) + ".jsonl");
  }
  std::filesystem::path classifier_examples(std::string_view split) const {
    return root / ("classifier." + std::string(split) + ".jsonl");
  }
  std::filesystem::path selector_dir() const { return root / "selector"; }
  std::filesystem::path classifier_dir() const { return root / "classifier"; }
  std::filesystem::path stage1_dir() const { return root / "stage1"; }
  std::filesystem::path stage2_dir() const { return root / "stage2"; }
  std::filesystem::path predictions() const { return root / "predictions.json"; }
  std::filesystem::path failures() const { return root / "failures.json"; }
  std::filesystem::path report_json() const { return root / "report.json"; }
  std::filesystem::path report_txt() const { return root / "report.txt"; }
};

// Per-component seeds derived from the single config seed.
inline std::uint64_t selector_seed(const PipelineConfig& c) { return c.seed; }
inline std::uint64_t classifier_seed(const PipelineConfig& c, ClassifierMode m) {
  return c.seed + 1 + static_cast<std::uint64_t>(m);
}

class Predictor {
 public:
  Predictor(SelectorModel selector, ClassifierModel one_phase)
      : selector_(std::move(selector)), classifier_(std::move(one_phase)) {
    if (std::get<ClassifierModel>(classifier_).mode() != ClassifierMode::kOnePhase) {
      throw ConfigError("one_phase predictor needs a one_phase classifier");
    }
  }
  Predictor(SelectorModel selector, CascadeModel cascade)
      : selector_(std::move(selector)), classifier_(std::move(cascade)) {}

  static Predictor load(const PipelineConfig& cfg, BackboneCache& cache) {
    const OutputLayout out{cfg.output_dir};
    auto require = [](const std::filesystem::path& dir) {
      if (!std::filesystem::exists(dir / "manifest.json")) {
        throw CheckpointError("missing checkpoint '" + dir.string() + "'");
      }
    };
    require(out.selector_dir());
    if (cfg.mode == PipelineMode::kOnePhase) {
      require(out.classifier_dir());
      return Predictor(load_selector(out.selector_dir(), cache),
                       load_classifier(out.classifier_dir(), cache));
    }
    require(out.stage1_dir());
    require(out.stage2_dir());
    return Predictor(load_selector(out.selector_dir(), cache),
                     CascadeModel(load_classifier(out.stage1_dir(), cache),
                                  load_classifier(out.stage2_dir(), cache)));
  }

  const SelectorModel& selector() const { return selector_; }
  bool two_phase() const { return std::holds_alternative<CascadeModel>(classifier_); }

  Prediction predict(const Record& record) const {
    const auto sentences = segment_sentences(record.corpus);
    const std::string claim = normalize(record.claim);
    const Selection sel = select_top1(selector_, claim, sentences);
    const Sentence& chosen = sentences[sel.index];
    Verdict verdict;
    if (const auto* one = std::get_if<ClassifierModel>(&classifier_)) {
      verdict = classify_1phase(*one, claim, chosen.text).verdict;
    } else {
      verdict = classify_2phase(std::get<CascadeModel>(classifier_), claim, chosen.text);
    }
    Prediction p;
    p.id = record.id;
    p.verdict = verdict;
    p.evidence = has_evidence(verdict) ? chosen.raw : std::string();
    p.score = sel.score;
    return p;
  }

 private:
  SelectorModel selector_;
  std::variant<ClassifierModel, CascadeModel> classifier_;
};

struct RecordFailure {
  std::string id;
  std::string message;
};

struct PipelineResult {
  std::vector<Prediction> predictions;  // input order; failed records omitted
  std::vector<RecordFailure> failures;
};

// Predicts every record independently. A record that throws is reported in
// `failures` and the run continues.
inline PipelineResult run_pipeline(const Predictor& predictor, const Dataset& ds, std::size_t workers = 1) {
  const std::size_t n = ds.records.size();
  std::vector<std::optional<Prediction>> preds(n);
  std::vector<std::optional<std::string>> errors(n);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        preds[i] = predictor.predict(ds.records[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back(run, w * chunk, std::min(n, (w + 1) * chunk));
    }
  }
  PipelineResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i]) result.predictions.push_back(std::move(*preds[i]));
    if (errors[i]) result.failures.push_back({ds.records[i].id, *errors[i]});
  }
  return result;
}

// --- stages ---------------------------------------------------------------

namespace detail {

inline Dataset require_dataset(const std::filesystem::path& path, std::string_view what) {
  if (path.empty()) throw ConfigError(std::string(what) + " dataset path is not configured");
  if (!std::filesystem::exists(path)) throw ConfigError(std::string(what) + " dataset '" + path.string() + "' not found");
  Dataset ds = load_dataset(path);
  ds.split_name = std::string(what);
  return ds;
}

inline std::optional<Dataset> optional_dataset(const std::filesystem::path& path, std::string_view what) {
  if (path.empty()) return std::nullopt;
  return require_dataset(path, what);
}

inline std::vector<PairExample> require_examples(const std::filesystem::path& path, std::string_view stage) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("'" + path.string() + "' not found; run " + std::string(stage) + " first");
  }
  return load_pair_examples(path);
}

inline void log_epoch(std::ostream& log, std::string_view what, const nn::EpochStats& s) {
  log << "[" << what << "] epoch " << s.epoch << " train_loss " << s.train_loss;
  if (s.dev_metric) log << " dev " << *s.dev_metric;
  log << "\n";
}

inline bool fully_labeled(const Dataset& ds) {
  for (const Record& r : ds.records) {
    if (!r.verdict) return false;
  }
  return !ds.empty();
}

}  // namespace detail

inline void preprocess_stage(const PipelineConfig& cfg, std::ostream& log = std::clog) {
  const OutputLayout out{cfg.output_dir};
  const Dataset train = detail::require_dataset(cfg.train_path, "train");
  const auto examples = build_selector_examples(train);
  write_pair_examples(examples, out.selector_examples("train"));
  log << "[preprocess] " << train.size() << " train records -> " << examples.size()
      << " selector examples\n";
  if (auto dev = detail::optional_dataset(cfg.dev_path, "dev")) {
    const auto dev_examples = build_selector_examples(*dev);
    write_pair_examples(dev_examples, out.selector_examples("dev"));
    log << "[preprocess] " << dev->size() << " dev records -> " << dev_examples.size()
        << " selector examples\n";
  }
}

inline void train_selector_stage(const PipelineConfig& cfg, BackboneCache& cache,
                                 std::ostream& log = std::clog) {
  const OutputLayout out{cfg.output_dir};
  const auto examples = detail::require_examples(out.selector_examples("train"), "preprocess");
  for (const auto& w : cfg.selector.grid_warnings()) log << "[train-selector] warning: " << w << "\n";
  std::vector<SelectorDevQuery> dev;
  if (auto dev_ds = detail::optional_dataset(cfg.dev_path, "dev")) dev = make_selector_dev(*dev_ds);
  auto result = train_selector(examples, cfg.selector, cache.get(cfg.selector_backbone),
                               selector_seed(cfg), dev.empty() ? nullptr : &dev,
                               [&](const nn::EpochStats& s) { detail::log_epoch(log, "train-selector", s); },
                               cfg.workers);
  save_selector(out.selector_dir(), result.model, cfg.selector_backbone, cfg.selector,
                selector_seed(cfg), result.history);
  log << "[train-selector] saved " << out.selector_dir().string() << "\n";
}

inline void build_nei_stage(const PipelineConfig& cfg, BackboneCache& cache,
                            std::ostream& log = std::clog) {
  const OutputLayout out{cfg.output_dir};
  const Dataset train = detail::require_dataset(cfg.train_path, "train");
  const auto dev = detail::optional_dataset(cfg.dev_path, "dev");
  auto build = [&](const auto& scorer) {
    const auto examples = build_classifier_examples(train, scorer, cfg.nei_top_k);
    write_pair_examples(examples, out.classifier_examples("train"));
    log << "[build-nei] " << examples.size() << " train classifier examples (" << cfg.nei_scorer
        << " scorer, top-" << cfg.nei_top_k << ")\n";
    if (dev) {
      const auto dev_examples = build_classifier_examples(*dev, scorer, cfg.nei_top_k);
      write_pair_examples(dev_examples, out.classifier_examples("dev"));
    }
  };
  if (cfg.nei_scorer == "tfidf") {
    build(TfIdfScorer(train));
  } else {
    if (!std::filesystem::exists(out.selector_dir() / "manifest.json")) {
      throw ConfigError("selector checkpoint not found; run train-selector first or set nei_scorer=tfidf");
    }
    const SelectorModel selector = load_selector(out.selector_dir(), cache);
    build(SelectorRelevance{&selector});
  }
}

inline void train_classifier_stage(const PipelineConfig& cfg, BackboneCache& cache,
                                   std::ostream& log = std::clog) {
  const OutputLayout out{cfg.output_dir};
  const auto examples = detail::require_examples(out.classifier_examples("train"), "build-nei");
  std::optional<std::vector<PairExample>> dev;
  if (std::filesystem::exists(out.classifier_examples("dev")) && !cfg.dev_path.empty()) {
    dev = load_pair_examples(out.classifier_examples("dev"));
  }
  for (const auto& w : cfg.classifier.grid_warnings()) log << "[train-classifier] warning: " << w << "\n";
  auto backend = cache.get(cfg.classifier_backbone);
  auto train_one = [&](ClassifierMode mode, const std::filesystem::path& dir) {
    const auto xs = relabel_for_mode(examples, mode);
    std::optional<std::vector<PairExample>> dev_xs;
    if (dev) dev_xs = relabel_for_mode(*dev, mode);
    const std::string tag = "train-classifier:" + std::string(to_string(mode));
    auto result = train_classifier(xs, cfg.classifier, backend, mode, classifier_seed(cfg, mode),
                                   dev_xs ? &*dev_xs : nullptr,
                                   [&](const nn::EpochStats& s) { detail::log_epoch(log, tag, s); },
                                   cfg.workers);
    save_classifier(dir, result.model, cfg.classifier_backbone, cfg.classifier,
                    classifier_seed(cfg, mode), result.history);
    log << "[" << tag << "] saved " << dir.string() << "\n";
  };
  if (cfg.mode == PipelineMode::kOnePhase) {
    train_one(ClassifierMode::kOnePhase, out.classifier_dir());
  } else {
    train_one(ClassifierMode::kStage1, out.stage1_dir());
    train_one(ClassifierMode::kStage2, out.stage2_dir());
  }
}

inline std::string serialize_failures(const std::vector<RecordFailure>& failures) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& f : failures) j.push_back({{"id", f.id}, {"error", f.message}});
  return j.dump(2) + "\n";
}

// Predicts `input` (default: the configured test split). Returns the result;
// predictions.json holds every successful record.
inline PipelineResult predict_stage(const PipelineConfig& cfg, BackboneCache& cache,
                                    const std::filesystem::path& input = {},
                                    std::ostream& log = std::clog) {
  const OutputLayout out{cfg.output_dir};
  const Predictor predictor = Predictor::load(cfg, cache);
  const Dataset ds = detail::require_dataset(input.empty() ? cfg.test_path : input, "test");
  PipelineResult result = run_pipeline(predictor, ds, cfg.workers);
  write_predictions(result.predictions, out.predictions());
  if (!result.failures.empty()) {
    write_file(out.failures(), serialize_failures(result.failures));
  } else {
    std::filesystem::remove(out.failures());
  }
  log << "[predict] " << result.predictions.size() << " predictions, " << result.failures.size()
      << " failures -> " << out.predictions().string() << "\n";
  return result;
}

inline Report evaluate_stage(const PipelineConfig& cfg, const std::filesystem::path& predictions = {},
                             const std::filesystem::path& gold_path = {}, std::ostream& log = std::clog) {
  const OutputLayout out{cfg.output_dir};
  const Dataset gold = detail::require_dataset(gold_path.empty() ? cfg.test_path : gold_path, "gold");
  const auto preds = load_predictions(predictions.empty() ? out.predictions() : predictions);
  const Report report = evaluate(preds, gold);
  write_file(out.report_json(), report_to_json(report).dump(2) + "\n");
  write_file(out.report_txt(), report_table(report));
  log << report_table(report);
  return report;
}

struct RunAllResult {
  PipelineResult predictions;
  std::optional<Report> report;
};

inline RunAllResult run_all(const PipelineConfig& cfg, std::ostream& log = std::clog) {
  BackboneCache cache;
  preprocess_stage(cfg, log);
  train_selector_stage(cfg, cache, log);
  build_nei_stage(cfg, cache, log);
  train_classifier_stage(cfg, cache, log);
  RunAllResult result;
  result.predictions = predict_stage(cfg, cache, {}, log);
  const Dataset test = detail::require_dataset(cfg.test_path, "test");
  if (detail::fully_labeled(test) && result.predictions.failures.empty()) {
    result.report = evaluate_stage(cfg, {}, {}, log);
  } else {
    log << "[run-all] skipping evaluation (unlabeled test split or failed records)\n";
  }
  return result;
}

}  // namespace factcheck
