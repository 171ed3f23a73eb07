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

#include "factcheck/data_model.hpp"
#include "factcheck/nn.hpp"
#include "test_util.hpp"

namespace factcheck {
namespace {

using testing::TempDir;

constexpr const char* kExampleEntry = R"({
  "20404": {
    "claim": "Hàng trăm đơn đăng ký được hỗ trợ chi phí tàu xe của người lao động đã gửi đến Vietnam Airlines",
    "context": "Sau khi chở lao động về Hà Nội tối qua, Vietnam Airlines hỗ trợ chi phí tàu xe cho người lao động về quê nhà. Đại diện hãng cho biết đã tiếp nhận hàng trăm đơn đăng ký của người lao động. Trong đó, có nhiều hoàn cảnh đặc biệt khó khăn.",
    "verdict": "SUPPORTED",
    "evidence": "Đại diện hãng cho biết đã tiếp nhận hàng trăm đơn đăng ký của người lao động."
  }
})";

TEST(VerdictTest, StringsRoundTripCaseExactly) {
  for (Verdict v : kAllVerdicts) EXPECT_EQ(parse_verdict(to_string(v)), v);
  EXPECT_EQ(to_string(Verdict::kSupported), "SUPPORTED");
  EXPECT_EQ(to_string(Verdict::kRefuted), "REFUTED");
  EXPECT_EQ(to_string(Verdict::kNei), "NEI");
  EXPECT_FALSE(parse_verdict("supported"));
  EXPECT_FALSE(parse_verdict("Nei"));
  EXPECT_FALSE(parse_verdict(""));
}

TEST(LoadDatasetTest, SingleSupportedEntry) {
  const Dataset ds = parse_dataset(kExampleEntry);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.records[0].id, "20404");
  EXPECT_EQ(ds.records[0].verdict, Verdict::kSupported);
  ASSERT_TRUE(ds.records[0].evidence);
}

TEST(LoadDatasetTest, EmptyObjectGivesEmptyDataset) {
  EXPECT_TRUE(parse_dataset("{}").empty());
}

TEST(LoadDatasetTest, NeiWithEvidenceIsRejectedNamingId) {
  try {
    parse_dataset(R"({"7": {"claim": "c", "context": "x.", "verdict": "NEI", "evidence": "x."}})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.id(), "7");
  }
}

TEST(LoadDatasetTest, MalformedJsonReportsByteOffset) {
  try {
    parse_dataset(R"({"1": {"claim": "c",, }})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.byte_offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(LoadDatasetTest, RejectsInvariantViolations) {
  EXPECT_THROW(parse_dataset(R"({"1": {"claim": "", "context": "x."}})"), ValidationError);
  EXPECT_THROW(parse_dataset(R"({"1": {"claim": "c", "context": "  "}})"), ValidationError);
  EXPECT_THROW(parse_dataset(R"({"1": {"claim": "c", "context": "x.", "verdict": "REFUTED"}})"),
               ValidationError);
  EXPECT_THROW(parse_dataset(R"({"1": {"claim": "c", "context": "x.", "verdict": "MAYBE"}})"),
               ValidationError);
  EXPECT_THROW(parse_dataset(R"({"1": {"claim": "c", "context": "x.", "evidence": "x."}})"),
               ValidationError);
  EXPECT_THROW(parse_dataset(R"({"1": {"context": "x."}})"), ValidationError);
  EXPECT_THROW(parse_dataset(R"({"1": {"claim": "a", "context": "x."},
                                 "1": {"claim": "b", "context": "y."}})"),
               ValidationError);
  EXPECT_THROW(parse_dataset("[]"), ParseError);
}

TEST(LoadDatasetTest, UnlabeledRecordsAreLegal) {
  const Dataset ds = parse_dataset(R"({"b": {"claim": "c", "context": "x."}, "a": {"claim": "d", "context": "y."}})");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_FALSE(ds.records[0].verdict);
  // File order, not sorted order.
  EXPECT_EQ(ds.records[0].id, "b");
  EXPECT_EQ(ds.records[1].id, "a");
}

TEST(LoadDatasetTest, LoadsFromFileAndMissingFileThrows) {
  TempDir dir;
  write_file(dir / "train.json", kExampleEntry);
  EXPECT_EQ(load_dataset(dir / "train.json").size(), 1u);
  EXPECT_THROW(load_dataset(dir / "absent.json"), Error);
}

// load(serialize(ds)) == ds over random valid datasets.
TEST(DatasetPropertyTest, SerializeLoadIsIdentity) {
  nn::Rng rng(11);
  const std::vector<std::string> pieces = {"Hà", "Nội", "\"quoted\"", "a\\b", "tab\t", "…", "x", "Đ"};
  for (int trial = 0; trial < 50; ++trial) {
    Dataset ds;
    const std::size_t n = rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      auto phrase = [&] {
        std::string s = pieces[rng.below(pieces.size())];
        for (std::size_t k = rng.below(4); k > 0; --k) s += " " + pieces[rng.below(pieces.size())];
        return s;
      };
      Record r;
      r.id = std::to_string(trial) + "-" + std::to_string(i);
      r.claim = phrase();
      r.corpus = phrase();
      switch (rng.below(4)) {
        case 0: break;
        case 1: r.verdict = Verdict::kNei; break;
        case 2: r.verdict = Verdict::kSupported; r.evidence = phrase(); break;
        default: r.verdict = Verdict::kRefuted; r.evidence = phrase(); break;
      }
      ds.records.push_back(r);
    }
    const Dataset back = parse_dataset(serialize_dataset(ds));
    EXPECT_EQ(back.records, ds.records);
  }
}

TEST(WritePredictionsTest, SingleNei) {
  TempDir dir;
  write_predictions({{"1", Verdict::kNei, "", 0.3}}, dir / "p.json");
  const auto doc = nlohmann::json::parse(read_file(dir / "p.json"));
  EXPECT_EQ(doc, nlohmann::json::parse(R"({"1": {"verdict": "NEI", "evidence": ""}})"));
}

TEST(WritePredictionsTest, EmptyListWritesEmptyObject) {
  TempDir dir;
  write_predictions({}, dir / "p.json");
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "p.json")), nlohmann::json::object());
}

TEST(WritePredictionsTest, DuplicateIdFailsBeforeWriting) {
  TempDir dir;
  const auto path = dir / "p.json";
  EXPECT_THROW(write_predictions({{"1", Verdict::kNei, "", 0.5}, {"1", Verdict::kNei, "", 0.5}}, path),
               ValidationError);
  EXPECT_FALSE(std::filesystem::exists(path));
}

TEST(WritePredictionsTest, RejectsNeiWithEvidenceAndBadScore) {
  EXPECT_THROW(serialize_predictions({{"1", Verdict::kNei, "x", 0.5}}), ValidationError);
  EXPECT_THROW(serialize_predictions({{"1", Verdict::kSupported, "x", 1.5}}), ValidationError);
}

TEST(PredictionPropertyTest, RoundTripKeepsVerdictEvidenceAndNeiEmptiness) {
  nn::Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Prediction> preds;
    for (std::size_t i = 0, n = rng.below(8); i < n; ++i) {
      const auto v = static_cast<Verdict>(rng.below(3));
      preds.push_back({"id" + std::to_string(i), v, has_evidence(v) ? "câu " + std::to_string(i) : "",
                       rng.uniform01()});
    }
    const auto back = parse_predictions(serialize_predictions(preds));
    ASSERT_EQ(back.size(), preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      EXPECT_EQ(back[i].id, preds[i].id);
      EXPECT_EQ(back[i].verdict, preds[i].verdict);
      EXPECT_EQ(back[i].evidence, preds[i].evidence);
      if (back[i].verdict == Verdict::kNei) {
        EXPECT_TRUE(back[i].evidence.empty());
      }
    }
  }
}

}  // namespace
}  // namespace factcheck
