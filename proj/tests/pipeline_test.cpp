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

#include <gtest/gtest.h>

#include <sstream>

#include "factcheck/checkpoint.hpp"
#include "factcheck/pipeline.hpp"
#include "factcheck/synthetic.hpp"
#include "factcheck/toy_backend.hpp"
#include "test_util.hpp"
#include "toy_setup.hpp"

namespace factcheck {
namespace {

using testing::TempDir;

std::shared_ptr<const EncoderBackend> toy() { return std::make_shared<ToyBackend>(); }

TEST(CheckpointTest, SelectorRoundTrip) {
  TempDir dir;
  auto m = SelectorModel::create(toy(), 2, 5);
  nn::Rng rng(4);
  m.head().init(rng);
  const std::vector<nn::EpochStats> hist = {{1, 0.5, 0.25}, {2, 0.4, std::nullopt}};
  save_selector(dir / "sel", m, BackboneRef{}, SelectorHyper{}, 99, hist);
  BackboneCache cache;
  const auto back = load_selector(dir / "sel", cache);
  EXPECT_EQ(back.head().params(), m.head().params());
  EXPECT_EQ(back.k_layers(), 2u);
  EXPECT_DOUBLE_EQ(score(back, "a b", "c d"), score(m, "a b", "c d"));
  const auto info = read_checkpoint_info(dir / "sel");
  EXPECT_EQ(info.seed, 99u);
  EXPECT_EQ(info.backbone.name, "toy");
  EXPECT_THROW(load_classifier(dir / "sel", cache), CheckpointError);
}

TEST(CheckpointTest, ClassifierRoundTripAndLabelGuard) {
  TempDir dir;
  auto m = ClassifierModel::create(toy(), ClassifierMode::kStage1, 1, 4);
  nn::Rng rng(6);
  m.head().init(rng);
  save_classifier(dir / "c", m, BackboneRef{}, ClassifierHyper{}, 1);
  BackboneCache cache;
  const auto back = load_classifier(dir / "c", cache);
  EXPECT_EQ(back.mode(), ClassifierMode::kStage1);
  EXPECT_EQ(back.head().params(), m.head().params());

  auto manifest = nlohmann::json::parse(read_file(dir / "c" / "manifest.json"));
  manifest["labels"] = {"N-RELEVANT", "RELEVANT"};
  write_file(dir / "c" / "manifest.json", manifest.dump());
  EXPECT_THROW(load_classifier(dir / "c", cache), CheckpointError);
  EXPECT_THROW(load_selector(dir / "missing", cache), CheckpointError);
}

TEST(BackboneCacheTest, SharesInstances) {
  BackboneCache cache;
  EXPECT_EQ(cache.get(BackboneRef{}).get(), cache.get(BackboneRef{}).get());
}

TEST(ConfigTest, DefaultsAndOverrides) {
  TempDir dir;
  write_file(dir / "cfg.json", R"({"data": {"train": "train.json", "test": "/abs/test.json"}, "seed": 3})");
  const auto c = load_config(dir / "cfg.json", {{"selector.learning_rate", "0.01"},
                                                 {"backbone.classifier", "toy"},
                                                 {"mode", "two_phase"},
                                                 {"output-dir", "run1"}});
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.train_path, dir / "train.json");
  EXPECT_EQ(c.test_path, std::filesystem::path("/abs/test.json"));
  EXPECT_EQ(c.output_dir, dir / "run1");
  EXPECT_DOUBLE_EQ(c.selector.learning_rate, 0.01);
  EXPECT_EQ(c.classifier_backbone.name, "toy");
  EXPECT_EQ(c.selector_backbone.name, "phobert");
  EXPECT_EQ(c.mode, PipelineMode::kTwoPhase);
  EXPECT_EQ(c.nei_top_k, 2u);
  EXPECT_DOUBLE_EQ(c.classifier.learning_rate, 1e-5);
  EXPECT_EQ(c.classifier.k_layers, 1u);
  EXPECT_EQ(c.selector.k_layers, 3u);
}

TEST(ConfigTest, Rejections) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"sed": 1})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"selector": {"lr": 1}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"mode": "three_phase"})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"selector": {"backbone": "gpt"}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"schema_version": 2})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"nei_scorer": "bm25"})")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError);
  nlohmann::json doc = nlohmann::json::object();
  EXPECT_THROW(apply_override(doc, "a..b", "1"), ConfigError);
}

TEST(ConfigTest, DefaultSchemaParses) {
  const auto c = parse_config(default_config_json());
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.mode, PipelineMode::kOnePhase);
}

// Toy checkpoints trained on a small synthetic split, shared by the tests
// below.
class ToyPipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("pipeline");
    synthetic::Options opt;
    opt.supported = 4;
    opt.refuted = 4;
    opt.nei = 4;
    write_dataset(synthetic::make_dataset(opt), *dir_ / "train.json");
    std::ostringstream log;
    run_all(cfg(PipelineMode::kOnePhase), log);
    run_all(cfg(PipelineMode::kTwoPhase), log);
  }
  static void TearDownTestSuite() { delete dir_; }

  static PipelineConfig cfg(PipelineMode m) {
    return testing::toy_config(*dir_ / (m == PipelineMode::kOnePhase ? "one" : "two"),
                               *dir_ / "train.json", *dir_ / "train.json", m);
  }

  static TempDir* dir_;
};

TempDir* ToyPipelineTest::dir_ = nullptr;

TEST_F(ToyPipelineTest, WritesLayout) {
  for (auto m : {PipelineMode::kOnePhase, PipelineMode::kTwoPhase}) {
    const OutputLayout out{cfg(m).output_dir};
    EXPECT_TRUE(std::filesystem::exists(out.selector_examples("train")));
    EXPECT_TRUE(std::filesystem::exists(out.classifier_examples("train")));
    EXPECT_TRUE(std::filesystem::exists(out.predictions()));
    EXPECT_TRUE(std::filesystem::exists(out.report_json()));
    EXPECT_FALSE(std::filesystem::exists(out.failures()));
    if (m == PipelineMode::kOnePhase) {
      EXPECT_TRUE(std::filesystem::exists(out.classifier_dir() / "manifest.json"));
    } else {
      EXPECT_TRUE(std::filesystem::exists(out.stage1_dir() / "manifest.json"));
      EXPECT_TRUE(std::filesystem::exists(out.stage2_dir() / "manifest.json"));
    }
  }
}

TEST_F(ToyPipelineTest, PredictionsAreWellFormed) {
  const Dataset ds = load_dataset(*dir_ / "train.json");
  for (auto m : {PipelineMode::kOnePhase, PipelineMode::kTwoPhase}) {
    const auto preds = load_predictions(OutputLayout{cfg(m).output_dir}.predictions());
    ASSERT_EQ(preds.size(), ds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      EXPECT_EQ(preds[i].id, ds.records[i].id);
      if (preds[i].verdict == Verdict::kNei) {
        EXPECT_TRUE(preds[i].evidence.empty());
      }
    }
  }
}

TEST_F(ToyPipelineTest, PredictionIsIndependentOfRecordOrder) {
  BackboneCache cache;
  const auto predictor = Predictor::load(cfg(PipelineMode::kOnePhase), cache);
  Dataset ds = load_dataset(*dir_ / "train.json");
  const auto base = run_pipeline(predictor, ds);
  nn::Rng rng(17);
  rng.shuffle(ds.records);
  const auto shuffled = run_pipeline(predictor, ds, 3);
  std::map<std::string, Prediction> by_id;
  for (const auto& p : base.predictions) by_id[p.id] = p;
  for (const auto& p : shuffled.predictions) {
    EXPECT_EQ(p.verdict, by_id[p.id].verdict);
    EXPECT_EQ(p.evidence, by_id[p.id].evidence);
    EXPECT_EQ(p.score, by_id[p.id].score);
  }
}

TEST_F(ToyPipelineTest, BadRecordIsReportedAndRunContinues) {
  BackboneCache cache;
  const auto predictor = Predictor::load(cfg(PipelineMode::kTwoPhase), cache);
  Dataset ds = load_dataset(*dir_ / "train.json");
  ds.records.resize(3);
  ds.records[1].corpus = "\"\" **";  // nothing to segment
  const auto res = run_pipeline(predictor, ds, 2);
  EXPECT_EQ(res.predictions.size(), 2u);
  ASSERT_EQ(res.failures.size(), 1u);
  EXPECT_EQ(res.failures[0].id, ds.records[1].id);
}

TEST_F(ToyPipelineTest, EvidenceIsRawSentenceText) {
  BackboneCache cache;
  const auto predictor = Predictor::load(cfg(PipelineMode::kOnePhase), cache);
  const Dataset ds = load_dataset(*dir_ / "train.json");
  for (const auto& r : ds.records) {
    const auto p = predictor.predict(r);
    if (p.evidence.empty()) continue;
    bool found = false;
    for (const auto& s : segment_sentences(r.corpus)) found |= s.raw == p.evidence;
    EXPECT_TRUE(found);
  }
}

TEST(PredictorTest, MissingCheckpointIsStartupError) {
  TempDir dir;
  BackboneCache cache;
  EXPECT_THROW(Predictor::load(testing::toy_config(dir / "out", "", ""), cache), CheckpointError);
}

TEST(StagesTest, OutOfOrderStagesFailClearly) {
  TempDir dir;
  write_dataset(synthetic::make_dataset({}), dir / "train.json");
  const auto c = testing::toy_config(dir / "out", dir / "train.json", dir / "train.json");
  BackboneCache cache;
  std::ostringstream log;
  EXPECT_THROW(train_selector_stage(c, cache, log), Error);
  EXPECT_THROW(build_nei_stage(c, cache, log), ConfigError);
  EXPECT_THROW(train_classifier_stage(c, cache, log), Error);
}

TEST(StagesTest, TfIdfNeiScorerNeedsNoSelector) {
  TempDir dir;
  write_dataset(synthetic::make_dataset({}), dir / "train.json");
  auto c = testing::toy_config(dir / "out", dir / "train.json", dir / "train.json");
  c.nei_scorer = "tfidf";
  BackboneCache cache;
  std::ostringstream log;
  build_nei_stage(c, cache, log);
  EXPECT_EQ(load_pair_examples(OutputLayout{c.output_dir}.classifier_examples("train")).size(), 80u);
}

TEST(EndToEndTest, FiveRecords) {
  TempDir dir;
  synthetic::Options opt;
  opt.supported = 2;
  opt.refuted = 2;
  opt.nei = 1;
  write_dataset(synthetic::make_dataset(opt), dir / "d.json");
  std::ostringstream log;
  const auto res = run_all(testing::toy_config(dir / "out", dir / "d.json", dir / "d.json"), log);
  ASSERT_EQ(res.predictions.predictions.size(), 5u);
  for (const auto& p : res.predictions.predictions) {
    if (p.verdict == Verdict::kNei) {
      EXPECT_TRUE(p.evidence.empty());
    }
  }
  ASSERT_TRUE(res.report);
  EXPECT_EQ(res.report->n_total, 5u);
}

TEST(EndToEndTest, StageOneAlwaysNotRelevant) {
  auto backend = toy();
  auto sel = SelectorModel::create(backend, 3, 4);
  auto s1 = ClassifierModel::create(backend, ClassifierMode::kStage1, 1, 4);
  s1.head().params()[s1.head().b2_offset() + kNotRelevant] = 10.0;
  auto s2 = ClassifierModel::create(backend, ClassifierMode::kStage2, 1, 4);
  s2.head().params()[s2.head().b2_offset()] = 10.0;
  const Predictor predictor(sel, CascadeModel(s1, s2));
  const auto res = run_pipeline(predictor, synthetic::make_dataset({}));
  ASSERT_EQ(res.predictions.size(), 60u);
  for (const auto& p : res.predictions) {
    EXPECT_EQ(p.verdict, Verdict::kNei);
    EXPECT_TRUE(p.evidence.empty());
  }
}

}  // namespace
}  // namespace factcheck
