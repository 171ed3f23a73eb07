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

// Dataset records, predictions, and their JSON file formats.
//
// Dataset file: a JSON object mapping id -> {"claim", "context", "verdict"?,
// "evidence"?}. Prediction file: a JSON object mapping id -> {"verdict",
// "evidence"}. Key order is preserved in both directions.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

using ordered_json = nlohmann::ordered_json;

enum class Verdict { kSupported = 0, kRefuted = 1, kNei = 2 };

inline constexpr std::array<Verdict, 3> kAllVerdicts = {
    Verdict::kSupported, Verdict::kRefuted, Verdict::kNei};

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kSupported: return "SUPPORTED";
    case Verdict::kRefuted: return "REFUTED";
    case Verdict::kNei: return "NEI";
  }
  return "NEI";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : kAllVerdicts) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

inline bool has_evidence(Verdict v) { return v != Verdict::kNei; }

struct Record {
  std::string id;
  std::string claim;
  std::string corpus;
  std::optional<Verdict> verdict;
  std::optional<std::string> evidence;

  bool labeled() const { return verdict.has_value(); }
  friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
  std::vector<Record> records;
  std::string split_name;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct Prediction {
  std::string id;
  Verdict verdict = Verdict::kNei;
  std::string evidence;  // empty iff verdict is NEI
  double score = 0.0;
};

inline void validate_record(const Record& r) {
  if (text::trim(r.claim).empty()) throw ValidationError(r.id, "empty claim");
  if (text::trim(r.corpus).empty()) throw ValidationError(r.id, "empty context");
  if (r.verdict) {
    if (has_evidence(*r.verdict) && !r.evidence) {
      throw ValidationError(r.id, std::string(to_string(*r.verdict)) +
                                      " record without evidence");
    }
    if (!has_evidence(*r.verdict) && r.evidence) {
      throw ValidationError(r.id, "NEI record must not carry evidence");
    }
  } else if (r.evidence) {
    throw ValidationError(r.id, "evidence given without a verdict");
  }
}

inline void validate_prediction(const Prediction& p) {
  if (p.verdict == Verdict::kNei && !p.evidence.empty()) {
    throw ValidationError(p.id, "NEI prediction must have empty evidence");
  }
  if (!(p.score >= 0.0 && p.score <= 1.0)) {
    throw ValidationError(p.id, "prediction score outside [0, 1]");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace detail {

// Parses a top-level JSON object, rejecting duplicate top-level keys, which
// nlohmann would otherwise silently collapse.
inline ordered_json parse_top_level_object(std::string_view text,
                                           std::string_view what) {
  std::unordered_set<std::string> seen;
  ordered_json::parser_callback_t cb =
      [&seen](int depth, ordered_json::parse_event_t event, ordered_json& parsed) {
        if (event == ordered_json::parse_event_t::key && depth == 1) {
          const auto key = parsed.get<std::string>();
          if (!seen.insert(key).second) {
            throw ValidationError(key, "duplicate id");
          }
        }
        return true;
      };
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end(), cb);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string(what) + ": malformed JSON at byte " +
                         std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!doc.is_object()) {
    throw ParseError(std::string(what) + ": top-level value must be an object", 0);
  }
  return doc;
}

inline std::optional<std::string> optional_string(const ordered_json& obj,
                                                  const std::string& id,
                                                  const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(id, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace detail

inline Dataset parse_dataset(std::string_view json_text, std::string split_name = {}) {
  const ordered_json doc = detail::parse_top_level_object(json_text, "dataset");
  Dataset ds;
  ds.split_name = std::move(split_name);
  ds.records.reserve(doc.size());
  for (const auto& [id, value] : doc.items()) {
    if (!value.is_object()) throw ValidationError(id, "entry must be an object");
    Record r;
    r.id = id;
    auto claim = detail::optional_string(value, id, "claim");
    auto context = detail::optional_string(value, id, "context");
    if (!claim) throw ValidationError(id, "missing 'claim'");
    if (!context) throw ValidationError(id, "missing 'context'");
    r.claim = std::move(*claim);
    r.corpus = std::move(*context);
    if (auto v = detail::optional_string(value, id, "verdict")) {
      r.verdict = parse_verdict(*v);
      if (!r.verdict) throw ValidationError(id, "unknown verdict '" + *v + "'");
    }
    r.evidence = detail::optional_string(value, id, "evidence");
    validate_record(r);
    ds.records.push_back(std::move(r));
  }
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path), path.stem().string());
}

inline std::string serialize_dataset(const Dataset& ds) {
  ordered_json doc = ordered_json::object();
  for (const Record& r : ds.records) {
    ordered_json entry;
    entry["claim"] = r.claim;
    entry["context"] = r.corpus;
    if (r.verdict) entry["verdict"] = std::string(to_string(*r.verdict));
    if (r.evidence) entry["evidence"] = *r.evidence;
    doc[r.id] = std::move(entry);
  }
  return doc.dump(2, ' ', false) + "\n";
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file(path, serialize_dataset(ds));
}

inline std::string serialize_predictions(const std::vector<Prediction>& predictions) {
  std::unordered_set<std::string> seen;
  for (const Prediction& p : predictions) {
    if (!seen.insert(p.id).second) throw ValidationError(p.id, "duplicate prediction id");
    validate_prediction(p);
  }
  ordered_json doc = ordered_json::object();
  for (const Prediction& p : predictions) {
    doc[p.id] = {{"verdict", std::string(to_string(p.verdict))},
                 {"evidence", p.evidence}};
  }
  return doc.dump(2, ' ', false) + "\n";
}

// Serializes fully before touching the file, so a duplicate id leaves any
// existing file intact.
inline void write_predictions(const std::vector<Prediction>& predictions,
                              const std::filesystem::path& path) {
  const std::string contents = serialize_predictions(predictions);
  write_file(path, contents);
}

inline std::vector<Prediction> parse_predictions(std::string_view json_text) {
  const ordered_json doc = detail::parse_top_level_object(json_text, "predictions");
  std::vector<Prediction> out;
  out.reserve(doc.size());
  for (const auto& [id, value] : doc.items()) {
    if (!value.is_object()) throw ValidationError(id, "entry must be an object");
    Prediction p;
    p.id = id;
    auto v = detail::optional_string(value, id, "verdict");
    if (!v) throw ValidationError(id, "missing 'verdict'");
    auto verdict = parse_verdict(*v);
    if (!verdict) throw ValidationError(id, "unknown verdict '" + *v + "'");
    p.verdict = *verdict;
    p.evidence = detail::optional_string(value, id, "evidence").value_or("");
    validate_prediction(p);
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_file(path));
}

}  // namespace factcheck
