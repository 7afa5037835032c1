// Copyright 2026 The planartrack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "planartrack/metrics.hpp"

namespace pt = planartrack;
namespace pm = planartrack::metrics;

namespace {

pt::DetectionRecord rec(int frame, int id, double x, double y, double w = 10, double h = 10, double conf = 1.0) {
  return {frame, id, {x, y, w, h}, conf};
}

pm::ClearCounts counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t idsw) {
  return {tp, fp, fn, idsw, tp + fn};
}

template <class F>
pt::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const pt::Error& e) {
    return e.code();
  }
  return pt::ErrorCode{};
}

}  // namespace

TEST(Mota, TableCounts) {
  EXPECT_NEAR(pm::mota(counts(13216 - 77, 77, 77, 18)), 0.9870, 0.0005);
  EXPECT_NEAR(pm::mota(counts(33330 - 83, 83, 83, 52)), 0.9935, 0.0005);
  EXPECT_EQ(pm::mota(counts(100, 0, 0, 0)), 1.0);
}

TEST(Mota, NotClamped) {
  EXPECT_LT(pm::mota(counts(1, 50, 9, 0)), 0.0);
}

TEST(Mota, ZeroGroundTruth) {
  EXPECT_EQ(code_of([] { pm::mota(pm::ClearCounts{}); }), pt::ErrorCode::ZeroGroundTruth);
}

TEST(Deta, Examples) {
  EXPECT_NEAR(pm::deta(counts(33247, 83, 83, 0)), 0.995, 0.001);
  EXPECT_EQ(pm::deta(counts(5, 0, 0, 0)), 1.0);
  EXPECT_EQ(pm::deta(counts(1, 1, 0, 0)), 0.5);
  EXPECT_EQ(code_of([] { pm::deta(pm::ClearCounts{}); }), pt::ErrorCode::EmptyEvaluation);
}

TEST(Matching, IdenticalHypothesis) {
  pt::RecordList gt;
  for (int f = 0; f < 10; ++f)
    for (int i = 1; i <= 3; ++i) gt.push_back(rec(f, i, 20.0 * i + f, 5));
  const auto m = pm::match_frames(gt, gt);
  EXPECT_EQ(m.counts.tp, 30);
  EXPECT_EQ(m.counts.fp, 0);
  EXPECT_EQ(m.counts.fn, 0);
  EXPECT_EQ(m.counts.idsw, 0);
  const auto r = pm::evaluate(gt, gt);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.motp, 0.0);
  EXPECT_EQ(r.idf1, 1.0);
  EXPECT_EQ(r.deta, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.map50, 1.0);
}

TEST(Matching, SingleSwitch) {
  pt::RecordList gt, hyp;
  for (int f = 0; f < 10; ++f) {
    gt.push_back(rec(f, 7, 0, 0));
    hyp.push_back(rec(f, f < 5 ? 1 : 2, 0, 0));
  }
  const auto m = pm::match_frames(gt, hyp);
  EXPECT_EQ(m.counts.idsw, 1);
  EXPECT_EQ(m.counts.tp, 10);
  EXPECT_EQ(m.frames[5].idsw, 1);
}

TEST(Matching, SwitchCountedAcrossUnmatchedGap) {
  pt::RecordList gt, hyp;
  for (int f = 0; f < 6; ++f) gt.push_back(rec(f, 1, 0, 0));
  hyp.push_back(rec(0, 4, 0, 0));
  hyp.push_back(rec(1, 4, 0, 0));
  hyp.push_back(rec(4, 5, 0, 0));
  const auto m = pm::match_frames(gt, hyp);
  EXPECT_EQ(m.counts.tp, 3);
  EXPECT_EQ(m.counts.fn, 3);
  EXPECT_EQ(m.counts.idsw, 1);
}

TEST(Matching, CarriesOverExistingCorrespondence) {
  // Frame 1 hyp 2 sits slightly better on gt 1 than hyp 1 does, but hyp 1 is
  // still above threshold and keeps the match.
  pt::RecordList gt{rec(0, 1, 0, 0), rec(1, 1, 0, 0)};
  pt::RecordList hyp{rec(0, 1, 0, 0), rec(1, 1, 2, 0), rec(1, 2, 1, 0)};
  const auto m = pm::match_frames(gt, hyp);
  EXPECT_EQ(m.counts.idsw, 0);
  EXPECT_EQ(m.counts.fp, 1);
  ASSERT_EQ(m.frames[1].pairs.size(), 1u);
  EXPECT_EQ(m.frames[1].pairs[0].hyp_id, 1);
}

TEST(Matching, InvariantsOnRandomSequences) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pos(0, 30);
  std::bernoulli_distribution keep(0.8);
  for (int trial = 0; trial < 50; ++trial) {
    pt::RecordList gt, hyp;
    for (int f = 0; f < 20; ++f)
      for (int i = 1; i <= 4; ++i) {
        if (keep(rng)) gt.push_back(rec(f, i, pos(rng), pos(rng)));
        if (keep(rng)) hyp.push_back(rec(f, i, pos(rng), pos(rng)));
      }
    const auto m = pm::match_frames(gt, hyp);
    EXPECT_EQ(m.counts.tp + m.counts.fn, m.counts.gt);
    EXPECT_EQ(m.counts.gt, static_cast<std::int64_t>(gt.size()));
    EXPECT_EQ(m.counts.tp + m.counts.fp, static_cast<std::int64_t>(hyp.size()));
    EXPECT_LE(m.counts.idsw, m.counts.tp);
  }
}

TEST(Matching, DuplicateId) {
  const pt::RecordList gt{rec(0, 1, 0, 0), rec(0, 1, 50, 0)};
  EXPECT_EQ(code_of([&] { pm::match_frames(gt, {}); }), pt::ErrorCode::DuplicateId);
}

TEST(Motp, Examples) {
  pm::FrameMatching m;
  m.frames.push_back({0, {{1, 1, 1.0 - 0.9}}, 0, 0, 0});
  m.frames.push_back({1, {{1, 1, 1.0 - 0.8}}, 0, 0, 0});
  EXPECT_NEAR(pm::motp(m), 0.15, 1e-12);
  pm::FrameMatching none;
  none.frames.push_back({0, {}, 1, 1, 0});
  EXPECT_EQ(code_of([&] { pm::motp(none); }), pt::ErrorCode::NoMatches);
}

TEST(Motp, PooledOverSequences) {
  // gt box 10x10, hyp shifted by 1 px: IoU 90/110.
  pt::RecordList gt, hyp;
  for (int f = 0; f < 4; ++f) {
    gt.push_back(rec(f, 1, 0, 0));
    hyp.push_back(rec(f, 1, f < 2 ? 0 : 1, 0));
  }
  const auto m = pm::match_frames(gt, hyp);
  EXPECT_NEAR(pm::motp(m), (2 * 0.0 + 2 * (1.0 - oracle::grid_iou(0, 0, 10, 10, 1, 0, 10, 10))) / 4.0, 1e-12);
}

TEST(Idf1, HalfCovered) {
  pt::RecordList gt, hyp;
  for (int f = 0; f < 10; ++f) {
    gt.push_back(rec(f, 1, 0, 0));
    hyp.push_back(rec(f, f < 5 ? 1 : 2, f < 5 ? 0 : 100, 0));
  }
  const auto ids = pm::id_metrics(gt, hyp);
  EXPECT_EQ(ids.idtp, 5);
  EXPECT_EQ(ids.idfn, 5);
  EXPECT_EQ(ids.idfp, 5);
  EXPECT_EQ(ids.idf1, 0.5);
}

TEST(Idf1, Perfect) {
  pt::RecordList gt;
  for (int f = 0; f < 5; ++f) gt.push_back(rec(f, 3, f, 0));
  EXPECT_EQ(pm::id_metrics(gt, gt).idf1, 1.0);
  EXPECT_EQ(code_of([&] { pm::id_metrics({}, gt); }), pt::ErrorCode::ZeroGroundTruth);
}

TEST(Idf1, MatchesExhaustiveMapping) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = fixture::id_scenario(rng);
    if (s.gt.empty()) continue;
    const std::int64_t best = oracle::exhaustive_idtp(s.gids, s.hids, s.overlap);
    const auto g = static_cast<std::int64_t>(s.gt.size()), h = static_cast<std::int64_t>(s.hyp.size());
    const double expected = 2.0 * static_cast<double>(best) / static_cast<double>(g + h);
    const auto ids = pm::id_metrics(s.gt, s.hyp);
    EXPECT_EQ(ids.idtp, best) << "trial " << trial;
    EXPECT_EQ(ids.idf1, expected) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 190);
}

TEST(AveragePrecision, RankedExample) {
  // Recall/precision after each rank: (1/3, 1), (1/3, 1/2), (2/3, 2/3), (1, 3/4).
  // The envelope is 1 up to recall 1/3 and 3/4 beyond.
  const std::vector<bool> ranked{true, false, true, true};
  EXPECT_NEAR(pm::average_precision(ranked, 3), 1.0 / 3 + 2.0 / 3 * 0.75, 1e-12);
  EXPECT_NEAR(pm::average_precision(ranked, 3), 0.8333333333, 1e-9);
}

TEST(AveragePrecision, PerfectAnyRanking) {
  pt::RecordList gt, dets;
  for (int f = 0; f < 5; ++f)
    for (int i = 1; i <= 2; ++i) {
      gt.push_back(rec(f, i, 30.0 * i, 0));
      dets.push_back(rec(f, -1, 30.0 * i, 0, 10, 10, 0.1 * (f + i)));
    }
  const auto s = pm::detection_pr(dets, gt, 0.5);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
  EXPECT_EQ(s.ap, 1.0);
  EXPECT_EQ(pm::detection_pr(dets, gt, 0.5, pm::ApInterpolation::Point101).ap, 1.0);
}

TEST(AveragePrecision, PrecisionArithmetic) {
  pt::RecordList gt, dets;
  for (int f = 0; f < 96; ++f) {
    gt.push_back(rec(f, 1, 0, 0));
    dets.push_back(rec(f, -1, 0, 0, 10, 10, 0.9));
  }
  for (int f = 0; f < 4; ++f) dets.push_back(rec(f, -1, 500, 500, 10, 10, 0.5));
  const auto s = pm::detection_pr(dets, gt, 0.5);
  EXPECT_EQ(s.tp, 96);
  EXPECT_EQ(s.fp, 4);
  EXPECT_DOUBLE_EQ(s.precision, 0.96);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.ap, 1.0);
}

TEST(AveragePrecision, DuplicateDetectionIsFalsePositive) {
  const pt::RecordList gt{rec(0, 1, 0, 0)};
  const pt::RecordList dets{rec(0, -1, 0, 0, 10, 10, 0.9), rec(0, -1, 0, 0, 10, 10, 0.8)};
  const auto s = pm::detection_pr(dets, gt, 0.5);
  EXPECT_EQ(s.tp, 1);
  EXPECT_EQ(s.fp, 1);
}

TEST(Report, ThresholdSweepAndJson) {
  pt::RecordList gt, hyp;
  for (int f = 0; f < 3; ++f) {
    gt.push_back(rec(f, 1, 0, 0));
    hyp.push_back(rec(f, 1, 1, 0));
  }
  const auto r = pm::evaluate(gt, hyp);
  ASSERT_EQ(r.ap_per_threshold.size(), 10u);
  EXPECT_NEAR(r.ap_per_threshold.front().first, 0.5, 1e-12);
  EXPECT_NEAR(r.ap_per_threshold.back().first, 0.95, 1e-12);
  // IoU 90/110 = 0.818 clears 0.50..0.80 and fails 0.85..0.95.
  EXPECT_NEAR(r.map50_95, 0.7, 1e-12);
  const auto j = pm::to_json(r);
  EXPECT_EQ(j.at("counts").at("tp").get<int>(), 3);
  const auto table = pm::format_table(r);
  EXPECT_NE(table.find("MOTA"), std::string::npos);
}
