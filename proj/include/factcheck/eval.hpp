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

// Strict accuracy, verdict accuracy and evidence Acc@1.
//
// Conventions where the metric definitions leave room:
//  * evidence strings are compared after normalize();
//  * for a gold-NEI record, the evidence term is 1 iff the predicted
//    evidence is empty, so StrAcc equals Acc on all-NEI data;
//  * Acc@1 only counts records whose gold verdict carries evidence and is
//    absent when there are none.

#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "factcheck/data_model.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/preprocess.hpp"

namespace factcheck {

inline bool evidence_matches(std::string_view predicted, std::string_view gold) {
  return normalize(predicted) == normalize(gold);
}

namespace detail {

struct Aligned {
  const Record* gold;
  const Prediction* pred;
};

inline std::vector<Aligned> align_predictions(const std::vector<Prediction>& predictions,
                                              const Dataset& gold) {
  if (gold.empty()) throw MetricError("gold dataset is empty");
  std::unordered_map<std::string_view, const Prediction*> by_id;
  for (const Prediction& p : predictions) by_id.emplace(p.id, &p);
  std::vector<Aligned> out;
  std::vector<std::string> missing;
  for (const Record& r : gold.records) {
    if (!r.verdict) throw MetricError("gold record '" + r.id + "' has no verdict", {r.id});
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      missing.push_back(r.id);
      continue;
    }
    out.push_back({&r, it->second});
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw MetricError("missing predictions for ids: " + list, std::move(missing));
  }
  return out;
}

inline bool verdict_ok(const Aligned& a) { return a.pred->verdict == *a.gold->verdict; }

inline bool evidence_ok(const Aligned& a) {
  if (!has_evidence(*a.gold->verdict)) return a.pred->evidence.empty();
  return evidence_matches(a.pred->evidence, *a.gold->evidence);
}

}  // namespace detail

struct Report {
  double strict_acc = 0.0;
  double acc = 0.0;
  std::optional<double> acc_at_1;
  std::size_t n_total = 0;
  std::size_t n_verdict_correct = 0;
  std::size_t n_strict_correct = 0;
  std::size_t n_evidence_eval = 0;
  std::size_t n_evidence_correct = 0;
};

inline Report evaluate(const std::vector<Prediction>& predictions, const Dataset& gold) {
  const auto aligned = detail::align_predictions(predictions, gold);
  Report r;
  r.n_total = aligned.size();
  for (const auto& a : aligned) {
    const bool v = detail::verdict_ok(a);
    const bool e = detail::evidence_ok(a);
    r.n_verdict_correct += v ? 1 : 0;
    r.n_strict_correct += (v && e) ? 1 : 0;
    if (has_evidence(*a.gold->verdict)) {
      ++r.n_evidence_eval;
      r.n_evidence_correct += e ? 1 : 0;
    }
  }
  const auto total = static_cast<double>(r.n_total);
  r.strict_acc = static_cast<double>(r.n_strict_correct) / total;
  r.acc = static_cast<double>(r.n_verdict_correct) / total;
  if (r.n_evidence_eval > 0) {
    r.acc_at_1 =
        static_cast<double>(r.n_evidence_correct) / static_cast<double>(r.n_evidence_eval);
  }
  return r;
}

inline double strict_accuracy(const std::vector<Prediction>& predictions, const Dataset& gold) {
  return evaluate(predictions, gold).strict_acc;
}

inline double verdict_accuracy(const std::vector<Prediction>& predictions, const Dataset& gold) {
  return evaluate(predictions, gold).acc;
}

inline std::optional<double> evidence_accuracy_at1(const std::vector<Prediction>& predictions,
                                                   const Dataset& gold) {
  return evaluate(predictions, gold).acc_at_1;
}

inline nlohmann::ordered_json report_to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["strict_acc"] = r.strict_acc;
  j["acc"] = r.acc;
  j["acc_at_1"] = r.acc_at_1 ? nlohmann::ordered_json(*r.acc_at_1) : nlohmann::ordered_json(nullptr);
  j["n_total"] = r.n_total;
  j["n_verdict_correct"] = r.n_verdict_correct;
  j["n_strict_correct"] = r.n_strict_correct;
  j["n_evidence_eval"] = r.n_evidence_eval;
  j["n_evidence_correct"] = r.n_evidence_correct;
  return j;
}

// Percentages under the StrAcc / Acc / Acc@1 column names.
inline std::string report_table(const Report& r) {
  auto pct = [](std::optional<double> v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
    return std::string(buf);
  };
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %s\n", "StrAcc", "Acc", "Acc@1", "N");
  out += line;
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %zu\n", pct(r.strict_acc).c_str(),
                pct(r.acc).c_str(), pct(r.acc_at_1).c_str(), r.n_total);
  out += line;
  return out;
}

}  // namespace factcheck
