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

#include <cmath>
#include <cstring>
#include <filesystem>

#include "factcheck/backbone.hpp"
#include "factcheck/nn.hpp"
#include "factcheck/transformer_backend.hpp"
#include "test_util.hpp"

#ifndef FACTCHECK_TINY_DIR
#define FACTCHECK_TINY_DIR ""
#endif

namespace factcheck {
namespace {

using testing::TempDir;

TransformerConfig wordpiece_cfg() {
  TransformerConfig c;
  c.scheme = SubwordScheme::kWordPiece;
  return c;
}

TEST(SubwordTokenizerTest, WordPieceGreedyLongestMatch) {
  const SubwordTokenizer tok({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "tin", "##h", "##hh", "t", "##in", ","},
                             wordpiece_cfg());
  EXPECT_EQ(tok.encode("tinh"), (std::vector<std::int64_t>{4, 5}));
  EXPECT_EQ(tok.encode("tinhh"), (std::vector<std::int64_t>{4, 6}));
  EXPECT_EQ(tok.encode("tin,tin"), (std::vector<std::int64_t>{4, 9, 4}));
  EXPECT_EQ(tok.encode("xyz tin"), (std::vector<std::int64_t>{1, 4}));  // whole word to UNK
  EXPECT_EQ(tok.cls(), 2);
  EXPECT_EQ(tok.sep(), 3);
}

TEST(SubwordTokenizerTest, SentencePieceAndBpeSuffix) {
  TransformerConfig sp;
  sp.scheme = SubwordScheme::kSentencePiece;
  sp.cls_token = "<s>";
  sp.sep_token = "</s>";
  sp.unk_token = "<unk>";
  const SubwordTokenizer a({"<s>", "<pad>", "</s>", "<unk>", "▁hà", "▁nội", "i", "▁nộ"}, sp);
  EXPECT_EQ(a.encode("hà nội"), (std::vector<std::int64_t>{4, 5}));
  EXPECT_EQ(a.encode("nội"), (std::vector<std::int64_t>{5}));

  TransformerConfig bpe = sp;
  bpe.scheme = SubwordScheme::kBpeSuffix;
  const SubwordTokenizer b({"<s>", "<pad>", "</s>", "<unk>", "hà@@", "nội", "h@@", "à"}, bpe);
  EXPECT_EQ(b.encode("hànội nội"), (std::vector<std::int64_t>{4, 5, 5}));
  EXPECT_EQ(b.encode("hà"), (std::vector<std::int64_t>{6, 7}));
}

TEST(SubwordTokenizerTest, MissingSpecialTokenIsCheckpointError) {
  EXPECT_THROW(SubwordTokenizer({"[UNK]", "[CLS]"}, wordpiece_cfg()), CheckpointError);
}

TEST(TransformerConfigTest, Validation) {
  const auto base = nlohmann::json{{"hidden_size", 8}, {"num_hidden_layers", 1}, {"num_attention_heads", 2},
                                   {"intermediate_size", 4}, {"max_position_embeddings", 8}};
  EXPECT_EQ(parse_transformer_config(base).hidden_size, 8u);
  auto bad = base;
  bad["num_attention_heads"] = 3;
  EXPECT_THROW(parse_transformer_config(bad), CheckpointError);
  bad = base;
  bad["subword_scheme"] = "unigram";
  EXPECT_THROW(parse_transformer_config(bad), CheckpointError);
  bad = base;
  bad.erase("hidden_size");
  EXPECT_THROW(parse_transformer_config(bad), CheckpointError);
}

// Writes a random post-LN encoder in the exported layout.
void write_random_checkpoint(const std::filesystem::path& dir, std::size_t H, std::size_t layers,
                             std::size_t heads, std::size_t inter, std::size_t positions,
                             const std::vector<std::string>& vocab) {
  nlohmann::json cfg = {{"hidden_size", H},           {"num_hidden_layers", layers},
                        {"num_attention_heads", heads}, {"intermediate_size", inter},
                        {"max_position_embeddings", positions}, {"type_vocab_size", 2}};
  write_file(dir / "config.json", cfg.dump());
  std::string v;
  for (const auto& t : vocab) v += t + "\n";
  write_file(dir / "vocab.txt", v);
  nn::Rng rng(5);
  nlohmann::json index = nlohmann::json::object();
  std::vector<float> data;
  auto add = [&](const std::string& name, std::vector<std::size_t> shape, float base = 0.0f) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    index[name] = {{"offset", data.size()}, {"shape", shape}};
    for (std::size_t i = 0; i < n; ++i) data.push_back(base + static_cast<float>(rng.uniform(-0.3, 0.3)));
  };
  add("embeddings.word_embeddings.weight", {vocab.size(), H});
  add("embeddings.position_embeddings.weight", {positions, H});
  add("embeddings.token_type_embeddings.weight", {2, H});
  add("embeddings.LayerNorm.weight", {H}, 1.0f);
  add("embeddings.LayerNorm.bias", {H});
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    for (const char* m : {"attention.self.query", "attention.self.key", "attention.self.value",
                          "attention.output.dense"}) {
      add(p + m + ".weight", {H, H});
      add(p + m + ".bias", {H});
    }
    add(p + "attention.output.LayerNorm.weight", {H}, 1.0f);
    add(p + "attention.output.LayerNorm.bias", {H});
    add(p + "intermediate.dense.weight", {inter, H});
    add(p + "intermediate.dense.bias", {inter});
    add(p + "output.dense.weight", {H, inter});
    add(p + "output.dense.bias", {H});
    add(p + "output.LayerNorm.weight", {H}, 1.0f);
    add(p + "output.LayerNorm.bias", {H});
  }
  write_file(dir / "tensors.json", index.dump());
  std::string bytes(data.size() * sizeof(float), '\0');
  std::memcpy(bytes.data(), data.data(), bytes.size());
  write_file(dir / "tensors.bin", bytes);
}

const std::vector<std::string> kVocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "xin", "chào", "hà", "nội"};

TEST(TransformerBackendTest, RandomCheckpointShapesAndDeterminism) {
  TempDir dir;
  write_random_checkpoint(dir.path(), 8, 3, 2, 12, 10, kVocab);
  const auto be = TransformerBackend::load(dir.path(), "tiny");
  EXPECT_EQ(be->hidden_size(), 8u);
  EXPECT_EQ(be->num_layers(), 3u);
  EXPECT_EQ(be->max_length(), 10u);
  const auto a = be->encode_pair("xin chào", "hà nội");
  ASSERT_EQ(a.num_layers(), 3u);
  for (const auto& layer : a.layers) {
    ASSERT_EQ(layer.size(), 8u);
    // Post-LN output with unit gain: roughly zero mean.
    double mean = 0.0;
    for (double x : layer) mean += x / 8.0;
    EXPECT_LT(std::abs(mean), 0.5);
  }
  EXPECT_EQ(a, be->encode_pair("xin chào", "hà nội"));
  EXPECT_NE(a, be->encode_pair("hà nội", "xin chào"));
  // Capped at the position table.
  EXPECT_EQ(TransformerBackend::load(dir.path(), "tiny", 64)->max_length(), 10u);
  EXPECT_EQ(TransformerBackend::load(dir.path(), "tiny", 6)->max_length(), 6u);
}

TEST(TransformerBackendTest, CorruptCheckpointsFail) {
  TempDir dir;
  write_random_checkpoint(dir.path(), 8, 1, 2, 12, 10, kVocab);
  EXPECT_THROW(TransformerBackend::load(dir / "absent", "x"), CheckpointError);

  auto index = nlohmann::json::parse(read_file(dir / "tensors.json"));
  auto saved = index;
  index.erase("encoder.layer.0.output.dense.bias");
  write_file(dir / "tensors.json", index.dump());
  EXPECT_THROW(TransformerBackend::load(dir.path(), "x"), CheckpointError);

  index = saved;
  index["embeddings.LayerNorm.bias"]["shape"] = {9};
  write_file(dir / "tensors.json", index.dump());
  EXPECT_THROW(TransformerBackend::load(dir.path(), "x"), CheckpointError);

  write_file(dir / "tensors.json", saved.dump());
  write_file(dir / "vocab.txt", "[UNK]\n[CLS]\n");
  EXPECT_THROW(TransformerBackend::load(dir.path(), "x"), CheckpointError);
}

TEST(TransformerBackendTest, LoadBackboneChecksRegistryShape) {
  TempDir dir;
  write_random_checkpoint(dir.path(), 8, 1, 2, 12, 10, kVocab);
  EXPECT_THROW(load_backbone(BackboneRef{"phobert", dir.path().string(), 0}), CheckpointError);
}

std::filesystem::path tiny_dir() { return FACTCHECK_TINY_DIR; }

TEST(TransformerOracleTest, MatchesReferenceBert) {
  const auto dir = tiny_dir() / "bert";
  if (!std::filesystem::exists(dir / "expected.json")) GTEST_SKIP() << "no reference encoder";
  const auto expected = nlohmann::json::parse(read_file(dir / "expected.json"));
  const auto be = TransformerBackend::load(dir, "tiny-bert", expected["max_length"].get<std::size_t>());
  for (const auto& c : expected["cases"]) {
    const auto pair = be->assemble_pair(c["claim"].get<std::string>(), c["sentence"].get<std::string>());
    EXPECT_EQ(pair.ids, c["ids"].get<std::vector<std::int64_t>>()) << c["claim"];
    EXPECT_EQ(pair.type_ids, c["type_ids"].get<std::vector<int>>());
    const auto emb = be->forward(pair);
    const auto want = c["cls"].get<std::vector<std::vector<double>>>();
    ASSERT_EQ(emb.num_layers(), want.size());
    for (std::size_t l = 0; l < want.size(); ++l) {
      for (std::size_t j = 0; j < want[l].size(); ++j) {
        EXPECT_NEAR(emb.layers[l][j], want[l][j], 1e-4) << "layer " << l << " dim " << j;
      }
    }
  }
}

TEST(TransformerOracleTest, MatchesReferenceRoberta) {
  const auto dir = tiny_dir() / "roberta";
  if (!std::filesystem::exists(dir / "expected.json")) GTEST_SKIP() << "no reference encoder";
  const auto expected = nlohmann::json::parse(read_file(dir / "expected.json"));
  const auto be = TransformerBackend::load(dir, "tiny-roberta");
  EXPECT_EQ(be->config().position_offset, 2u);
  for (const auto& c : expected["cases"]) {
    EncodedPair pair;
    pair.ids = c["ids"].get<std::vector<std::int64_t>>();
    pair.type_ids = c["type_ids"].get<std::vector<int>>();
    const auto emb = be->forward(pair);
    const auto want = c["cls"].get<std::vector<std::vector<double>>>();
    ASSERT_EQ(emb.num_layers(), want.size());
    for (std::size_t l = 0; l < want.size(); ++l) {
      for (std::size_t j = 0; j < want[l].size(); ++j) {
        EXPECT_NEAR(emb.layers[l][j], want[l][j], 1e-4) << "layer " << l << " dim " << j;
      }
    }
  }
}

}  // namespace
}  // namespace factcheck
