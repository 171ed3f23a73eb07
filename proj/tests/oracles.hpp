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

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "factcheck/data_model.hpp"
#include "factcheck/nn.hpp"
#include "factcheck/preprocess.hpp"

namespace factcheck::oracle {

// Literal per-record metric definitions, written without the library's
// aggregation code.
struct Metrics {
  double strict = 0.0;
  double acc = 0.0;
  std::optional<double> acc_at_1;
};

inline Metrics brute_force(const std::vector<Prediction>& preds, const Dataset& gold) {
  double strict_sum = 0.0;
  double verdict_sum = 0.0;
  double ev_hits = 0.0;
  double ev_total = 0.0;
  for (const Record& g : gold.records) {
    const Prediction* p = nullptr;
    for (const Prediction& q : preds) {
      if (q.id == g.id) p = &q;
    }
    const double fv = p->verdict == *g.verdict ? 1.0 : 0.0;
    double fe;
    if (*g.verdict == Verdict::kNei) {
      fe = p->evidence.empty() ? 1.0 : 0.0;
    } else {
      fe = normalize(p->evidence) == normalize(*g.evidence) ? 1.0 : 0.0;
      ev_total += 1.0;
      ev_hits += fe;
    }
    strict_sum += fv * fe;
    verdict_sum += fv;
  }
  const double n = static_cast<double>(gold.size());
  Metrics m{strict_sum / n, verdict_sum / n, std::nullopt};
  if (ev_total > 0.0) m.acc_at_1 = ev_hits / ev_total;
  return m;
}

// Random gold set (1..max_records records) and a prediction list that
// sometimes copies gold fields, sometimes perturbs them, in shuffled order.
struct Case {
  Dataset gold;
  std::vector<Prediction> preds;
};

inline Case random_case(nn::Rng& rng, std::size_t max_records = 5) {
  const std::vector<std::string> sentences = {"Mèo ăn cá.", "Chó chạy nhanh.", "Trời mưa to.",
                                              "Hà Nội đẹp."};
  Case c;
  const std::size_t n = 1 + rng.below(max_records);
  for (std::size_t i = 0; i < n; ++i) {
    Record r;
    r.id = "r" + std::to_string(i);
    r.claim = "khẳng định " + std::to_string(i);
    r.corpus = "Mèo ăn cá. Chó chạy nhanh. Trời mưa to. Hà Nội đẹp.";
    r.verdict = static_cast<Verdict>(rng.below(3));
    if (has_evidence(*r.verdict)) r.evidence = sentences[rng.below(sentences.size())];
    c.gold.records.push_back(r);

    Prediction p;
    p.id = r.id;
    p.verdict = rng.below(2) ? *r.verdict : static_cast<Verdict>(rng.below(3));
    if (has_evidence(p.verdict)) {
      switch (rng.below(3)) {
        case 0: p.evidence = r.evidence ? *r.evidence : sentences[0]; break;
        case 1: {
          std::string up = r.evidence ? *r.evidence : sentences[1];
          for (char& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
          p.evidence = "  " + up;
          break;
        }
        default: p.evidence = sentences[rng.below(sentences.size())]; break;
      }
    }
    p.score = rng.uniform01();
    c.preds.push_back(p);
  }
  rng.shuffle(c.preds);
  return c;
}

}  // namespace factcheck::oracle
