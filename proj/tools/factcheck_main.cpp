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

// Command-line driver for the claim verification pipeline.
//
// Sample usage:
//   factcheck make-synthetic --out data/train.json
//   factcheck run-all --config configs/toy.json --seed 7
//   factcheck predict --config configs/toy.json --input data/blind.json
//
// Exit codes: 0 success, 1 usage or configuration error, 2 some records
// failed, 3 fatal error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "factcheck/factcheck.hpp"
#include "factcheck/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;
constexpr int kExitFatal = 3;

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> selector_backbone;
  std::optional<std::string> classifier_backbone;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> workers;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "Pipeline config file (JSON)")->required();
    cmd->add_option("--set", sets, "Override a config key, e.g. selector.epochs=4")->take_all();
    cmd->add_option("--seed", seed, "Override the random seed");
    cmd->add_option("--mode", mode, "one_phase or two_phase");
    cmd->add_option("--backbone.selector", selector_backbone, "Selector backbone id");
    cmd->add_option("--backbone.classifier", classifier_backbone, "Classifier backbone id");
    cmd->add_option("--output-dir", output_dir, "Override the output directory");
    cmd->add_option("--workers", workers, "Worker threads for encoding and inference");
  }

  factcheck::PipelineConfig load() const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw factcheck::ConfigError("--set expects key=value, got '" + s + "'");
      }
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    auto quoted = [](const std::string& v) { return nlohmann::json(v).dump(); };
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (mode) overrides.emplace_back("mode", quoted(*mode));
    if (selector_backbone) overrides.emplace_back("selector.backbone", quoted(*selector_backbone));
    if (classifier_backbone) overrides.emplace_back("classifier.backbone", quoted(*classifier_backbone));
    if (output_dir) {
      overrides.emplace_back("output_dir",
                             quoted(std::filesystem::absolute(*output_dir).string()));
    }
    if (workers) overrides.emplace_back("workers", std::to_string(*workers));
    return factcheck::load_config(config, overrides);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Claim verification: evidence selection and verdict classification"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* preprocess = app.add_subcommand("preprocess", "Segment the train/dev splits and write selector examples");
  auto* train_selector = app.add_subcommand("train-selector", "Train the rationale selector head");
  auto* build_nei = app.add_subcommand("build-nei", "Build classifier examples (top-k NEI sampling)");
  auto* train_classifier = app.add_subcommand("train-classifier", "Train the verdict classifier head(s)");
  auto* predict = app.add_subcommand("predict", "Predict verdicts and evidence for a dataset");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
  auto* run_all = app.add_subcommand("run-all", "Run every stage in order");
  for (auto* cmd : {preprocess, train_selector, build_nei, train_classifier, predict, evaluate, run_all}) {
    flags.attach(cmd);
  }
  std::string predict_input;
  predict->add_option("--input", predict_input, "Dataset to predict (default: data.test)");
  std::string eval_predictions;
  std::string eval_gold;
  evaluate->add_option("--predictions", eval_predictions, "Prediction file (default: <output_dir>/predictions.json)");
  evaluate->add_option("--gold", eval_gold, "Gold dataset (default: data.test)");

  auto* print_config = app.add_subcommand("print-config", "Print the default config with every key");
  auto* synth = app.add_subcommand("make-synthetic", "Write a synthetic labeled dataset");
  std::string synth_out;
  factcheck::synthetic::Options synth_opt;
  synth->add_option("--out", synth_out, "Output dataset path")->required();
  synth->add_option("--supported", synth_opt.supported, "Number of SUPPORTED records");
  synth->add_option("--refuted", synth_opt.refuted, "Number of REFUTED records");
  synth->add_option("--nei", synth_opt.nei, "Number of NEI records");
  synth->add_option("--seed", synth_opt.seed, "Generator seed");
  bool synth_unlabeled = false;
  synth->add_flag("--unlabeled", synth_unlabeled, "Omit verdict and evidence fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (print_config->parsed()) {
      std::cout << factcheck::default_config_json().dump(2) << "\n";
      return kExitOk;
    }
    if (synth->parsed()) {
      synth_opt.labeled = !synth_unlabeled;
      factcheck::write_dataset(factcheck::synthetic::make_dataset(synth_opt), synth_out);
      return kExitOk;
    }
    const factcheck::PipelineConfig cfg = flags.load();
    factcheck::BackboneCache cache;
    if (preprocess->parsed()) {
      factcheck::preprocess_stage(cfg);
    } else if (train_selector->parsed()) {
      factcheck::train_selector_stage(cfg, cache);
    } else if (build_nei->parsed()) {
      factcheck::build_nei_stage(cfg, cache);
    } else if (train_classifier->parsed()) {
      factcheck::train_classifier_stage(cfg, cache);
    } else if (predict->parsed()) {
      const auto result = factcheck::predict_stage(cfg, cache, predict_input);
      if (!result.failures.empty()) return kExitPartial;
    } else if (evaluate->parsed()) {
      factcheck::evaluate_stage(cfg, eval_predictions, eval_gold);
    } else if (run_all->parsed()) {
      const auto result = factcheck::run_all(cfg);
      if (!result.predictions.failures.empty()) return kExitPartial;
    }
  } catch (const factcheck::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}
