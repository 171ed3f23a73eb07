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

// Sentence segmentation, text normalization, and construction of the pair
// examples consumed by the selector and the verdict classifier.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "factcheck/data_model.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

// Lowercases, drops quotation marks and asterisks, collapses runs of an
// identical punctuation character to one, collapses whitespace to single
// spaces and trims. Idempotent.
inline std::string normalize(std::string_view input) {
  std::u32string kept;
  for (char32_t cp : text::decode_utf8(input)) {
    if (text::is_quote(cp) || cp == U'*') continue;
    kept.push_back(text::to_lower(cp));
  }
  std::u32string collapsed;
  for (char32_t cp : kept) {
    if (text::is_punct(cp) && !collapsed.empty() && collapsed.back() == cp) continue;
    collapsed.push_back(cp);
  }
  std::string out;
  bool pending_space = false;
  for (char32_t cp : collapsed) {
    if (text::is_space(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    text::append_utf8(out, cp);
  }
  return out;
}

struct Sentence {
  std::size_t index = 0;
  std::string text;  // normalize(raw)
  std::string raw;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

namespace detail {

inline bool is_terminal(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == 0x2026;
}

inline bool is_closing(char32_t c) {
  return text::is_quote(c) || c == U')' || c == U']' || c == U'}';
}

inline bool is_opening(char32_t c) {
  return text::is_quote(c) || c == U'(' || c == U'[' || c == U'{';
}

}  // namespace detail

// Splits a corpus at terminal punctuation (. ! ? and the ellipsis) followed
// by whitespace. A terminal run that is an ellipsis ("…" or two or more
// dots) only ends the sentence when the next word starts with a capital
// letter. Closing quotes and brackets directly after the run stay with the
// sentence they close.
inline std::vector<Sentence> segment_sentences(std::string_view corpus) {
  const std::u32string cps = text::decode_utf8(corpus);
  const std::size_t n = cps.size();
  std::vector<std::u32string> pieces;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!detail::is_terminal(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool ellipsis = false;
    std::size_t dots = 0;
    while (j < n && detail::is_terminal(cps[j])) {
      if (cps[j] == 0x2026) ellipsis = true;
      if (cps[j] == U'.') {
        if (++dots >= 2) ellipsis = true;
      } else {
        dots = 0;
      }
      ++j;
    }
    while (j < n && detail::is_closing(cps[j])) ++j;
    if (j < n && !text::is_space(cps[j])) {
      i = j;
      continue;
    }
    bool boundary = true;
    if (ellipsis) {
      std::size_t k = j;
      while (k < n && text::is_space(cps[k])) ++k;
      while (k < n && detail::is_opening(cps[k])) ++k;
      boundary = k < n && text::is_upper(cps[k]);
    }
    if (boundary) {
      pieces.push_back(cps.substr(start, j - start));
      start = j;
    }
    i = j;
  }
  if (start < n) pieces.push_back(cps.substr(start));

  // Fragments that normalize to nothing (stray quotes, asterisks) are folded
  // into the preceding sentence, or the following one at the start.
  std::vector<std::string> raws;
  std::string carry;
  for (const auto& piece : pieces) {
    std::string raw = text::trim(text::encode_utf8(piece));
    if (raw.empty()) continue;
    if (normalize(raw).empty()) {
      if (!raws.empty()) {
        raws.back() += " " + raw;
      } else {
        carry += carry.empty() ? raw : " " + raw;
      }
      continue;
    }
    if (!carry.empty()) {
      raw = carry + " " + raw;
      carry.clear();
    }
    raws.push_back(std::move(raw));
  }
  if (raws.empty()) throw Error("no sentences in corpus");

  std::vector<Sentence> out;
  out.reserve(raws.size());
  for (std::size_t idx = 0; idx < raws.size(); ++idx) {
    out.push_back(Sentence{idx, normalize(raws[idx]), std::move(raws[idx])});
  }
  return out;
}

// SQuAD-style multiset token-overlap F1 over normalized whitespace tokens.
inline double token_f1(std::string_view a, std::string_view b) {
  const auto ta = text::split_whitespace(normalize(a));
  const auto tb = text::split_whitespace(normalize(b));
  if (ta.empty() || tb.empty()) return (ta.empty() && tb.empty()) ? 1.0 : 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : ta) ++counts[t];
  int common = 0;
  for (const auto& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(tb.size());
  const double recall = static_cast<double>(common) / static_cast<double>(ta.size());
  return 2.0 * precision * recall / (precision + recall);
}

inline constexpr double kAlignmentMinF1 = 0.8;

// Index of the sentence matching the gold evidence: exact normalized match
// first, otherwise the best token-F1 sentence if it reaches the threshold.
inline std::optional<std::size_t> align_evidence(std::string_view evidence,
                                                 const std::vector<Sentence>& sentences,
                                                 double min_f1 = kAlignmentMinF1) {
  const std::string target = normalize(evidence);
  for (const Sentence& s : sentences) {
    if (s.text == target) return s.index;
  }
  std::optional<std::size_t> best;
  double best_f1 = -1.0;
  for (const Sentence& s : sentences) {
    const double f1 = token_f1(evidence, s.raw);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = s.index;
    }
  }
  if (best && best_f1 >= min_f1) return best;
  return std::nullopt;
}

inline std::size_t align_or_throw(const Record& record, const std::vector<Sentence>& sentences) {
  auto idx = align_evidence(*record.evidence, sentences);
  if (!idx) throw AlignmentError(record.id, "gold evidence matches no sentence of the context");
  return *idx;
}

struct PairExample {
  std::string claim;
  std::string sentence;
  int label = 0;

  friend bool operator==(const PairExample&, const PairExample&) = default;
};

// Verdict labels used in classifier pair examples.
inline int verdict_label(Verdict v) { return static_cast<int>(v); }

// One example per sentence; label 1 only for the aligned gold evidence.
inline std::vector<PairExample> build_selector_examples(const Record& record,
                                                        const std::vector<Sentence>& sentences) {
  if (!record.verdict) throw ValidationError(record.id, "selector examples need a gold verdict");
  std::optional<std::size_t> positive;
  if (has_evidence(*record.verdict)) positive = align_or_throw(record, sentences);
  const std::string claim = normalize(record.claim);
  std::vector<PairExample> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) {
    out.push_back({claim, s.text, positive && *positive == s.index ? 1 : 0});
  }
  return out;
}

inline std::vector<PairExample> build_selector_examples(const Dataset& ds) {
  std::vector<PairExample> out;
  for (const Record& r : ds.records) {
    auto ex = build_selector_examples(r, segment_sentences(r.corpus));
    out.insert(out.end(), std::make_move_iterator(ex.begin()), std::make_move_iterator(ex.end()));
  }
  return out;
}

// Indices of the k largest scores, descending, ties to the lower index.
inline std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

template <typename F>
concept RelevanceScorer = requires(const F& f, const std::string& claim,
                                   const std::vector<Sentence>& sentences) {
  { f(claim, sentences) } -> std::convertible_to<std::vector<double>>;
};

// For SUPPORTED/REFUTED records: one example (claim, gold sentence,
// verdict). For NEI records: one example per top-k scored sentence.
// `scorer(normalized_claim, sentences)` returns one relevance per sentence.
template <RelevanceScorer Scorer>
std::vector<PairExample> build_classifier_examples(const Dataset& ds, const Scorer& scorer,
                                                   std::size_t k = 2) {
  if (k == 0) throw Error("nei top-k must be at least 1");
  std::vector<PairExample> out;
  for (const Record& r : ds.records) {
    if (!r.verdict) throw ValidationError(r.id, "classifier examples need a gold verdict");
    const auto sentences = segment_sentences(r.corpus);
    const std::string claim = normalize(r.claim);
    if (has_evidence(*r.verdict)) {
      const std::size_t idx = align_or_throw(r, sentences);
      out.push_back({claim, sentences[idx].text, verdict_label(*r.verdict)});
      continue;
    }
    const std::vector<double> scores = scorer(claim, sentences);
    if (scores.size() != sentences.size()) {
      throw Error("relevance scorer returned " + std::to_string(scores.size()) +
                  " scores for " + std::to_string(sentences.size()) + " sentences");
    }
    for (std::size_t idx : top_k_indices(scores, k)) {
      out.push_back({claim, sentences[idx].text, verdict_label(Verdict::kNei)});
    }
  }
  return out;
}

// Bootstrap relevance scorer: cosine similarity of log-scaled TF-IDF
// vectors, with document frequencies taken over a sentence collection.
class TfIdfScorer {
 public:
  TfIdfScorer() = default;

  explicit TfIdfScorer(const Dataset& ds) {
    for (const Record& r : ds.records) {
      for (const Sentence& s : segment_sentences(r.corpus)) add_document(s.text);
    }
  }

  void add_document(std::string_view normalized) {
    std::unordered_set<std::string> uniq;
    for (auto& t : text::split_whitespace(normalized)) uniq.insert(std::move(t));
    for (const auto& t : uniq) ++df_[t];
    ++num_docs_;
  }

  double idf(const std::string& term) const {
    auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(num_docs_)) / (1.0 + df)) + 1.0;
  }

  double similarity(std::string_view a, std::string_view b) const {
    const auto va = vectorize(a);
    const auto vb = vectorize(b);
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [t, w] : va) {
      na += w * w;
      auto it = vb.find(t);
      if (it != vb.end()) dot += w * it->second;
    }
    for (const auto& [t, w] : vb) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
  }

  std::vector<double> operator()(const std::string& claim,
                                 const std::vector<Sentence>& sentences) const {
    std::vector<double> out;
    out.reserve(sentences.size());
    for (const Sentence& s : sentences) out.push_back(similarity(claim, s.text));
    return out;
  }

 private:
  // std::map keeps the accumulation order fixed.
  std::map<std::string, double> vectorize(std::string_view s) const {
    std::map<std::string, double> tf;
    for (auto& t : text::split_whitespace(normalize(s))) tf[t] += 1.0;
    for (auto& [t, w] : tf) w = (1.0 + std::log(w)) * idf(t);
    return tf;
  }

  std::unordered_map<std::string, std::size_t> df_;
  std::size_t num_docs_ = 0;
};

// JSON-lines interchange: one {"claim", "sentence", "label"} object per line.
inline std::string serialize_pair_examples(const std::vector<PairExample>& examples) {
  std::string out;
  for (const PairExample& ex : examples) {
    nlohmann::ordered_json j = {{"claim", ex.claim}, {"sentence", ex.sentence}, {"label", ex.label}};
    out += j.dump(-1, ' ', false);
    out += '\n';
  }
  return out;
}

inline std::vector<PairExample> parse_pair_examples(std::string_view contents) {
  std::vector<PairExample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = contents.substr(pos, end - pos);
    ++line_no;
    if (!text::trim(line).empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("pair examples line " + std::to_string(line_no) + ": " + e.what(),
                         pos + e.byte);
      }
      if (!j.is_object() || !j.contains("claim") || !j.contains("sentence") ||
          !j.contains("label") || !j["claim"].is_string() || !j["sentence"].is_string() ||
          !j["label"].is_number_integer()) {
        throw ParseError("pair examples line " + std::to_string(line_no) +
                             ": expected {claim, sentence, label}",
                         pos);
      }
      out.push_back({j["claim"].get<std::string>(), j["sentence"].get<std::string>(),
                     j["label"].get<int>()});
    }
    pos = end + 1;
  }
  return out;
}

inline void write_pair_examples(const std::vector<PairExample>& examples,
                                const std::filesystem::path& path) {
  write_file(path, serialize_pair_examples(examples));
}

inline std::vector<PairExample> load_pair_examples(const std::filesystem::path& path) {
  return parse_pair_examples(read_file(path));
}

}  // namespace factcheck
