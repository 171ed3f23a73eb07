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

// Synthetic labeled datasets for smoke runs and tests. Evidence sentences
// carry a marker word and SUPPORTED/REFUTED evidence a verdict word, so a
// working pipeline can fit them exactly.

#include <cstdint>
#include <string>
#include <vector>

#include "factcheck/data_model.hpp"
#include "factcheck/nn.hpp"

namespace factcheck::synthetic {

inline constexpr const char* kEvidenceMarker = "chứngcứ";
inline constexpr const char* kSupportMarker = "xácnhận";
inline constexpr const char* kRefuteMarker = "bácbỏ";

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "hàng",  "trăm", "đơn",   "đăng",  "ký",    "hỗ",   "trợ",   "chi",   "phí",   "tàu",
      "xe",    "người", "lao",  "động",  "gửi",   "đến",  "hãng",  "bay",   "tối",   "qua",
      "về",    "quê",  "nhà",   "đại",   "diện",  "cho",  "biết",  "tiếp",  "nhận",  "nhiều",
      "hoàn",  "cảnh", "khó",   "khăn",  "thân",  "bệnh", "năm",   "chưa",  "được",  "thành"};
  return words;
}

struct Options {
  std::size_t supported = 20;
  std::size_t refuted = 20;
  std::size_t nei = 20;
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 5;
  std::uint64_t seed = 7;
  bool labeled = true;
};

namespace detail {

inline std::string capitalize_ascii(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 32);
  return w;
}

inline std::string filler_sentence(nn::Rng& rng, std::size_t min_words, std::size_t max_words,
                                   const std::vector<std::string>& extra) {
  const auto& words = filler_words();
  const std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < n; ++i) toks.push_back(words[rng.below(words.size())]);
  for (const auto& e : extra) {
    toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(1 + rng.below(toks.size())), e);
  }
  std::string s = "Tin " + toks[0];
  for (std::size_t i = 1; i < toks.size(); ++i) s += " " + toks[i];
  return s + ".";
}

}  // namespace detail

// Records are interleaved SUPPORTED, REFUTED, NEI with ids "syn-0000"...
inline Dataset make_dataset(const Options& opt) {
  nn::Rng rng(opt.seed);
  Dataset ds;
  ds.split_name = "synthetic";
  std::size_t remaining[3] = {opt.supported, opt.refuted, opt.nei};
  std::size_t id = 0;
  while (remaining[0] + remaining[1] + remaining[2] > 0) {
    for (int k = 0; k < 3; ++k) {
      if (remaining[k] == 0) continue;
      --remaining[k];
      const auto verdict = static_cast<Verdict>(k);
      const std::size_t n_sent =
          opt.min_sentences + rng.below(opt.max_sentences - opt.min_sentences + 1);
      const std::size_t evidence_at = rng.below(n_sent);
      std::string corpus;
      std::string evidence;
      for (std::size_t s = 0; s < n_sent; ++s) {
        std::string sent;
        if (has_evidence(verdict) && s == evidence_at) {
          sent = detail::filler_sentence(
              rng, 3, 6,
              {kEvidenceMarker, verdict == Verdict::kSupported ? kSupportMarker : kRefuteMarker});
          evidence = sent;
        } else {
          sent = detail::filler_sentence(rng, 4, 8, {});
        }
        corpus += (corpus.empty() ? "" : " ") + sent;
      }
      Record r;
      char buf[32];
      std::snprintf(buf, sizeof buf, "syn-%04zu", id++);
      r.id = buf;
      r.claim = "Khẳng định " + detail::filler_sentence(rng, 3, 6, {});
      r.corpus = corpus;
      if (opt.labeled) {
        r.verdict = verdict;
        if (has_evidence(verdict)) r.evidence = evidence;
      }
      ds.records.push_back(std::move(r));
    }
  }
  return ds;
}

}  // namespace factcheck::synthetic
