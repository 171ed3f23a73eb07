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

// BERT/RoBERTa-style post-LayerNorm transformer encoder loaded from an
// exported checkpoint directory:
//
//   config.json    architecture and tokenizer settings
//   vocab.txt      one token per line, id = zero-based line number
//   tensors.json   {name: {"offset": float index, "shape": [...]}}
//   tensors.bin    little-endian float32 data
//
// Tensor names follow the Hugging Face BertModel/RobertaModel state dict
// with the model prefix stripped. tools/export_hf_checkpoint.py writes this
// layout. The encoder is inference-only.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "factcheck/data_model.hpp"
#include "factcheck/encoder.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

enum class SubwordScheme {
  kWordPiece,      // "##" marks a continuation piece
  kSentencePiece,  // "▁" marks a word-initial piece
  kBpeSuffix,      // "@@" marks a non-final piece (fastBPE)
};

struct TransformerConfig {
  std::size_t hidden_size = 0;
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  std::size_t intermediate_size = 0;
  std::size_t max_position_embeddings = 0;
  std::size_t type_vocab_size = 0;
  std::size_t position_offset = 0;  // RoBERTa positions start at padding_idx + 1
  double layer_norm_eps = 1e-12;
  SubwordScheme scheme = SubwordScheme::kWordPiece;
  std::string cls_token = "[CLS]";
  std::string sep_token = "[SEP]";
  std::string unk_token = "[UNK]";
  bool split_punctuation = true;
};

inline TransformerConfig parse_transformer_config(const nlohmann::json& j) {
  TransformerConfig c;
  try {
    c.hidden_size = j.at("hidden_size").get<std::size_t>();
    c.num_layers = j.at("num_hidden_layers").get<std::size_t>();
    c.num_heads = j.at("num_attention_heads").get<std::size_t>();
    c.intermediate_size = j.at("intermediate_size").get<std::size_t>();
    c.max_position_embeddings = j.at("max_position_embeddings").get<std::size_t>();
    c.type_vocab_size = j.value("type_vocab_size", std::size_t{2});
    c.position_offset = j.value("position_offset", std::size_t{0});
    c.layer_norm_eps = j.value("layer_norm_eps", 1e-12);
    const std::string scheme = j.value("subword_scheme", std::string("wordpiece"));
    if (scheme == "wordpiece") {
      c.scheme = SubwordScheme::kWordPiece;
    } else if (scheme == "sentencepiece") {
      c.scheme = SubwordScheme::kSentencePiece;
    } else if (scheme == "bpe_suffix") {
      c.scheme = SubwordScheme::kBpeSuffix;
    } else {
      throw CheckpointError("unknown subword_scheme '" + scheme + "'");
    }
    c.cls_token = j.value("cls_token", c.cls_token);
    c.sep_token = j.value("sep_token", c.sep_token);
    c.unk_token = j.value("unk_token", c.unk_token);
    c.split_punctuation = j.value("split_punctuation", true);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("transformer config: ") + e.what());
  }
  if (c.hidden_size == 0 || c.num_layers == 0 || c.num_heads == 0 ||
      c.hidden_size % c.num_heads != 0) {
    throw CheckpointError("transformer config: hidden_size must be a positive multiple of "
                          "num_attention_heads");
  }
  return c;
}

// Greedy longest-match subword tokenizer over a fixed vocabulary. Exact for
// WordPiece vocabularies; an approximation for unigram SentencePiece and
// merge-based BPE vocabularies.
class SubwordTokenizer {
 public:
  SubwordTokenizer(std::vector<std::string> vocab, const TransformerConfig& cfg)
      : vocab_(std::move(vocab)), scheme_(cfg.scheme), split_punct_(cfg.split_punctuation) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], i);
    unk_ = lookup_required(cfg.unk_token);
    cls_ = lookup_required(cfg.cls_token);
    sep_ = lookup_required(cfg.sep_token);
  }

  std::int64_t cls() const { return cls_; }
  std::int64_t sep() const { return sep_; }
  std::int64_t unk() const { return unk_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  std::vector<std::int64_t> encode(std::string_view s) const {
    std::vector<std::int64_t> out;
    for (const auto& word : basic_split(s)) encode_word(word, out);
    return out;
  }

 private:
  static constexpr std::size_t kMaxWordChars = 100;

  std::int64_t lookup_required(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) throw CheckpointError("vocabulary lacks special token '" + token + "'");
    return static_cast<std::int64_t>(it->second);
  }

  std::vector<std::string> basic_split(std::string_view s) const {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    };
    for (char32_t cp : text::decode_utf8(s)) {
      if (text::is_space(cp)) {
        flush();
      } else if (split_punct_ && text::is_punct(cp)) {
        flush();
        text::append_utf8(cur, cp);
        flush();
      } else {
        text::append_utf8(cur, cp);
      }
    }
    flush();
    return words;
  }

  void encode_word(const std::string& word, std::vector<std::int64_t>& out) const {
    const std::u32string cps = text::decode_utf8(word);
    if (cps.size() > kMaxWordChars) {
      out.push_back(unk_);
      return;
    }
    std::vector<std::int64_t> pieces;
    std::size_t start = 0;
    while (start < cps.size()) {
      std::size_t end = cps.size();
      std::int64_t found = -1;
      while (end > start) {
        std::string piece = text::encode_utf8(std::u32string_view(cps).substr(start, end - start));
        switch (scheme_) {
          case SubwordScheme::kWordPiece:
            if (start > 0) piece = "##" + piece;
            break;
          case SubwordScheme::kSentencePiece:
            if (start == 0) piece = "\xE2\x96\x81" + piece;
            break;
          case SubwordScheme::kBpeSuffix:
            if (end < cps.size()) piece += "@@";
            break;
        }
        auto it = ids_.find(piece);
        if (it != ids_.end()) {
          found = static_cast<std::int64_t>(it->second);
          break;
        }
        --end;
      }
      if (found < 0) {
        out.push_back(unk_);
        return;
      }
      pieces.push_back(found);
      start = end;
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> ids_;
  SubwordScheme scheme_;
  bool split_punct_;
  std::int64_t unk_ = 0;
  std::int64_t cls_ = 0;
  std::int64_t sep_ = 0;
};

class TransformerBackend final : public EncoderBackend {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using RowVector = Eigen::RowVectorXf;

  // `name` is the backbone identifier recorded in checkpoints; max_length 0
  // means the checkpoint's position capacity.
  static std::unique_ptr<TransformerBackend> load(const std::filesystem::path& dir,
                                                  std::string name, std::size_t max_length = 0) {
    if (!std::filesystem::is_directory(dir)) {
      throw CheckpointError("backbone checkpoint directory '" + dir.string() + "' not found");
    }
    nlohmann::json cfg_json;
    try {
      cfg_json = nlohmann::json::parse(read_file(dir / "config.json"));
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError("config.json: " + std::string(e.what()));
    }
    const TransformerConfig cfg = parse_transformer_config(cfg_json);
    std::vector<std::string> vocab;
    {
      std::ifstream in(dir / "vocab.txt");
      if (!in) throw CheckpointError("missing vocab.txt in '" + dir.string() + "'");
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.push_back(line);
      }
    }
    const std::size_t capacity = cfg.max_position_embeddings - cfg.position_offset;
    if (max_length == 0 || max_length > capacity) max_length = capacity;
    return std::unique_ptr<TransformerBackend>(
        new TransformerBackend(std::move(name), cfg, std::move(vocab), dir, max_length));
  }

  const TransformerConfig& config() const { return cfg_; }
  const SubwordTokenizer& tokenizer() const { return tokenizer_; }

  LayerEmbeddings forward(const EncodedPair& pair) const override {
    const std::size_t n = pair.ids.size();
    const std::size_t H = cfg_.hidden_size;
    if (n + cfg_.position_offset > cfg_.max_position_embeddings) {
      throw EncoderError("sequence longer than the position table");
    }
    Matrix x(n, H);
    for (std::size_t t = 0; t < n; ++t) {
      const auto id = pair.ids[t];
      if (id < 0 || static_cast<Eigen::Index>(id) >= word_emb_.rows()) {
        throw EncoderError("token id " + std::to_string(id) + " outside the vocabulary");
      }
      const std::size_t type =
          cfg_.type_vocab_size > 1 ? static_cast<std::size_t>(pair.type_ids[t]) : 0;
      x.row(t) = word_emb_.row(id) + pos_emb_.row(t + cfg_.position_offset) +
                 type_emb_.row(type);
    }
    x = layer_norm(x, emb_ln_gamma_, emb_ln_beta_);

    LayerEmbeddings out;
    out.layers.reserve(layers_.size());
    const std::size_t heads = cfg_.num_heads;
    const std::size_t dh = H / heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    for (const Layer& L : layers_) {
      const Matrix q = affine(x, L.q_w, L.q_b);
      const Matrix k = affine(x, L.k_w, L.k_b);
      const Matrix v = affine(x, L.v_w, L.v_b);
      Matrix ctx(n, H);
      for (std::size_t h = 0; h < heads; ++h) {
        const auto qh = q.middleCols(h * dh, dh);
        const auto kh = k.middleCols(h * dh, dh);
        const auto vh = v.middleCols(h * dh, dh);
        Matrix scores = (qh * kh.transpose()) * scale;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
          const float m = scores.row(r).maxCoeff();
          scores.row(r) = (scores.row(r).array() - m).exp();
          scores.row(r) /= scores.row(r).sum();
        }
        ctx.middleCols(h * dh, dh) = scores * vh;
      }
      x = layer_norm(x + affine(ctx, L.attn_out_w, L.attn_out_b), L.attn_ln_gamma, L.attn_ln_beta);
      Matrix inter = affine(x, L.inter_w, L.inter_b);
      inter = inter.unaryExpr([](float z) {
        return 0.5f * z * (1.0f + std::erf(z * 0.70710678118654752f));
      });
      x = layer_norm(x + affine(inter, L.out_w, L.out_b), L.out_ln_gamma, L.out_ln_beta);
      Vector cls(H);
      for (std::size_t j = 0; j < H; ++j) cls[j] = static_cast<double>(x(0, j));
      out.layers.push_back(std::move(cls));
    }
    return out;
  }

 protected:
  std::vector<std::int64_t> tokenize_words(std::string_view s) const override {
    return tokenizer_.encode(s);
  }
  std::int64_t cls_id() const override { return tokenizer_.cls(); }
  std::int64_t sep_id() const override { return tokenizer_.sep(); }

 private:
  struct Layer {
    Matrix q_w, k_w, v_w, attn_out_w, inter_w, out_w;
    RowVector q_b, k_b, v_b, attn_out_b, attn_ln_gamma, attn_ln_beta;
    RowVector inter_b, out_b, out_ln_gamma, out_ln_beta;
  };

  class TensorStore {
   public:
    explicit TensorStore(const std::filesystem::path& dir) {
      try {
        index_ = nlohmann::json::parse(read_file(dir / "tensors.json"));
      } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("tensors.json: " + std::string(e.what()));
      }
      const std::string bytes = read_file(dir / "tensors.bin");
      if (bytes.size() % sizeof(float) != 0) throw CheckpointError("tensors.bin size not a multiple of 4");
      data_.resize(bytes.size() / sizeof(float));
      std::memcpy(data_.data(), bytes.data(), bytes.size());
    }

    Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
      const float* p = locate(name, rows * cols, {rows, cols});
      Matrix m(rows, cols);
      std::memcpy(m.data(), p, rows * cols * sizeof(float));
      return m;
    }

    RowVector vector(const std::string& name, std::size_t size) const {
      const float* p = locate(name, size, {size});
      RowVector v(size);
      std::memcpy(v.data(), p, size * sizeof(float));
      return v;
    }

   private:
    const float* locate(const std::string& name, std::size_t count,
                        const std::vector<std::size_t>& shape) const {
      auto it = index_.find(name);
      if (it == index_.end()) throw CheckpointError("missing tensor '" + name + "'");
      const auto got = (*it).at("shape").get<std::vector<std::size_t>>();
      if (got != shape) throw CheckpointError("tensor '" + name + "' has unexpected shape");
      const auto offset = (*it).at("offset").get<std::size_t>();
      if (offset + count > data_.size()) throw CheckpointError("tensor '" + name + "' out of range");
      return data_.data() + offset;
    }

    nlohmann::json index_;
    std::vector<float> data_;
  };

  TransformerBackend(std::string name, TransformerConfig cfg, std::vector<std::string> vocab,
                     const std::filesystem::path& dir, std::size_t max_length)
      : EncoderBackend({std::move(name), cfg.hidden_size, cfg.num_layers, max_length}),
        cfg_(cfg),
        tokenizer_(std::move(vocab), cfg) {
    const TensorStore store(dir);
    const std::size_t H = cfg_.hidden_size;
    const std::size_t I = cfg_.intermediate_size;
    word_emb_ = store.matrix("embeddings.word_embeddings.weight", tokenizer_.vocab_size(), H);
    pos_emb_ = store.matrix("embeddings.position_embeddings.weight", cfg_.max_position_embeddings, H);
    type_emb_ = store.matrix("embeddings.token_type_embeddings.weight", cfg_.type_vocab_size, H);
    emb_ln_gamma_ = store.vector("embeddings.LayerNorm.weight", H);
    emb_ln_beta_ = store.vector("embeddings.LayerNorm.bias", H);
    for (std::size_t l = 0; l < cfg_.num_layers; ++l) {
      const std::string p = "encoder.layer." + std::to_string(l) + ".";
      Layer L;
      L.q_w = store.matrix(p + "attention.self.query.weight", H, H);
      L.q_b = store.vector(p + "attention.self.query.bias", H);
      L.k_w = store.matrix(p + "attention.self.key.weight", H, H);
      L.k_b = store.vector(p + "attention.self.key.bias", H);
      L.v_w = store.matrix(p + "attention.self.value.weight", H, H);
      L.v_b = store.vector(p + "attention.self.value.bias", H);
      L.attn_out_w = store.matrix(p + "attention.output.dense.weight", H, H);
      L.attn_out_b = store.vector(p + "attention.output.dense.bias", H);
      L.attn_ln_gamma = store.vector(p + "attention.output.LayerNorm.weight", H);
      L.attn_ln_beta = store.vector(p + "attention.output.LayerNorm.bias", H);
      L.inter_w = store.matrix(p + "intermediate.dense.weight", I, H);
      L.inter_b = store.vector(p + "intermediate.dense.bias", I);
      L.out_w = store.matrix(p + "output.dense.weight", H, I);
      L.out_b = store.vector(p + "output.dense.bias", H);
      L.out_ln_gamma = store.vector(p + "output.LayerNorm.weight", H);
      L.out_ln_beta = store.vector(p + "output.LayerNorm.bias", H);
      layers_.push_back(std::move(L));
    }
  }

  // x W^T + b with W stored [out, in] as in torch.nn.Linear.
  static Matrix affine(const Matrix& x, const Matrix& w, const RowVector& b) {
    Matrix y = x * w.transpose();
    y.rowwise() += b;
    return y;
  }

  Matrix layer_norm(const Matrix& x, const RowVector& gamma, const RowVector& beta) const {
    Matrix y(x.rows(), x.cols());
    const float eps = static_cast<float>(cfg_.layer_norm_eps);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const float mean = x.row(r).mean();
      const RowVector centered = x.row(r).array() - mean;
      const float var = centered.squaredNorm() / static_cast<float>(x.cols());
      y.row(r) = (centered / std::sqrt(var + eps)).cwiseProduct(gamma) + beta;
    }
    return y;
  }

  TransformerConfig cfg_;
  SubwordTokenizer tokenizer_;
  Matrix word_emb_, pos_emb_, type_emb_;
  RowVector emb_ln_gamma_, emb_ln_beta_;
  std::vector<Layer> layers_;
};

}  // namespace factcheck
