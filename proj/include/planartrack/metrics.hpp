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

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "planartrack/assignment.hpp"
#include "planartrack/core.hpp"
#include "planartrack/ingest.hpp"

namespace planartrack::metrics {

struct ClearCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t gt = 0;
};

struct MatchedPair {
  int gt_id = 0;
  int hyp_id = 0;
  double distance = 0.0;  // 1 - IoU
};

struct FrameMatches {
  int frame = 0;
  std::vector<MatchedPair> pairs;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
};

struct FrameMatching {
  std::vector<FrameMatches> frames;
  ClearCounts counts;
};

namespace detail {

inline void check_unique_ids(const RecordList& recs, const char* which, int frame) {
  std::set<int> seen;
  for (const auto& r : recs) {
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::DuplicateId, std::string(which) + " id " + std::to_string(r.id) + " appears twice in frame " +
                                              std::to_string(frame + 1));
    }
  }
}

inline std::set<int> all_frames(const std::map<int, RecordList>& a, const std::map<int, RecordList>& b) {
  std::set<int> f;
  for (const auto& [k, _] : a) f.insert(k);
  for (const auto& [k, _] : b) f.insert(k);
  return f;
}

}  // namespace detail

/// CLEAR-MOT correspondence. Per frame: keep last frame's pairs that still
/// overlap with IoU >= threshold, match the rest by Hungarian on 1 - IoU
/// (IoU >= threshold only), count the leftovers as FN/FP, and count an
/// identity switch when a gt object's hypothesis differs from the one at its
/// previous matched frame.
inline FrameMatching match_frames(const RecordList& gt, const RecordList& hyp, double match_threshold = 0.5) {
  const auto gt_frames = by_frame(gt);
  const auto hyp_frames = by_frame(hyp);
  static const RecordList empty;
  FrameMatching out;
  std::map<int, int> previous;       // gt id -> hyp id, previous frame
  std::map<int, int> last_matched;   // gt id -> hyp id, most recent matched frame

  for (int f : detail::all_frames(gt_frames, hyp_frames)) {
    const auto git = gt_frames.find(f);
    const auto hit = hyp_frames.find(f);
    const RecordList& g = git == gt_frames.end() ? empty : git->second;
    const RecordList& h = hit == hyp_frames.end() ? empty : hit->second;
    detail::check_unique_ids(g, "gt", f);
    detail::check_unique_ids(h, "hypothesis", f);

    std::vector<std::vector<double>> iou(g.size(), std::vector<double>(h.size(), 0.0));
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < h.size(); ++j) iou[i][j] = box_iou(g[i].bbox, h[j].bbox);

    FrameMatches fm;
    fm.frame = f;
    std::vector<bool> g_used(g.size(), false), h_used(h.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto prev = previous.find(g[i].id);
      if (prev == previous.end()) continue;
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (!h_used[j] && h[j].id == prev->second && iou[i][j] >= match_threshold) {
          g_used[i] = h_used[j] = true;
          pairs.emplace_back(i, j);
          break;
        }
      }
    }
    std::vector<std::size_t> gi, hj;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g_used[i]) gi.push_back(i);
    for (std::size_t j = 0; j < h.size(); ++j)
      if (!h_used[j]) hj.push_back(j);
    if (!gi.empty() && !hj.empty()) {
      // Slightly above 1 - threshold so pairs exactly at the threshold still gain from matching.
      const double cutoff = 1.0 - match_threshold + 1e-9;
      CostMatrix c(gi.size(), hj.size(), 1.0);
      for (std::size_t a = 0; a < gi.size(); ++a)
        for (std::size_t b = 0; b < hj.size(); ++b) {
          const double v = iou[gi[a]][hj[b]];
          c(a, b) = v >= match_threshold ? 1.0 - v : cutoff + 1.0;
        }
      const Assignment asg = hungarian_assign(c, cutoff);
      for (const auto& m : asg.matches) {
        if (iou[gi[m.row]][hj[m.col]] >= match_threshold) pairs.emplace_back(gi[m.row], hj[m.col]);
      }
    }
    std::sort(pairs.begin(), pairs.end());

    std::map<int, int> current;
    for (const auto& [i, j] : pairs) {
      const int gid = g[i].id, hid = h[j].id;
      const auto lm = last_matched.find(gid);
      if (lm != last_matched.end() && lm->second != hid) ++fm.idsw;
      last_matched[gid] = hid;
      current[gid] = hid;
      fm.pairs.push_back({gid, hid, 1.0 - iou[i][j]});
    }
    previous = std::move(current);
    const auto tp = static_cast<std::int64_t>(fm.pairs.size());
    fm.fn = static_cast<std::int64_t>(g.size()) - tp;
    fm.fp = static_cast<std::int64_t>(h.size()) - tp;
    out.counts.tp += tp;
    out.counts.fn += fm.fn;
    out.counts.fp += fm.fp;
    out.counts.idsw += fm.idsw;
    out.counts.gt += static_cast<std::int64_t>(g.size());
    out.frames.push_back(std::move(fm));
  }
  return out;
}

/// 1 - (FN + FP + IDSW) / GT. Not clamped; strongly failing trackers go negative.
inline double mota(const ClearCounts& c) {
  if (c.gt <= 0) throw Error(ErrorCode::ZeroGroundTruth, "MOTA needs at least one ground-truth box");
  return 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt);
}

/// Mean 1 - IoU over matched pairs (lower is better).
inline double motp(const FrameMatching& m) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto& f : m.frames) {
    for (const auto& p : f.pairs) sum += p.distance;
    n += static_cast<std::int64_t>(f.pairs.size());
  }
  if (n == 0) throw Error(ErrorCode::NoMatches, "MOTP is undefined without matches");
  return sum / static_cast<double>(n);
}

inline double deta(const ClearCounts& c) {
  const std::int64_t denom = c.tp + c.fn + c.fp;
  if (denom <= 0) throw Error(ErrorCode::EmptyEvaluation, "DetA needs TP + FN + FP > 0");
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

struct IdCounts {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  double idf1 = 0.0;
  std::map<int, int> mapping;  // gt id -> hyp id
};

/// Frames in which each (gt id, hyp id) pair overlaps with IoU >= threshold.
inline std::map<std::pair<int, int>, std::int64_t> identity_overlaps(const RecordList& gt, const RecordList& hyp,
                                                                       double threshold = 0.5) {
  const auto gt_frames = by_frame(gt);
  const auto hyp_frames = by_frame(hyp);
  std::map<std::pair<int, int>, std::int64_t> overlap;
  for (const auto& [f, g] : gt_frames) {
    const auto hit = hyp_frames.find(f);
    if (hit == hyp_frames.end()) continue;
    for (const auto& a : g)
      for (const auto& b : hit->second)
        if (box_iou(a.bbox, b.bbox) >= threshold) ++overlap[{a.id, b.id}];
  }
  return overlap;
}

inline double idf1_from(std::int64_t idtp, std::int64_t idfp, std::int64_t idfn) {
  const std::int64_t denom = 2 * idtp + idfp + idfn;
  return denom > 0 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(denom) : 0.0;
}

/// Identity metrics under the global gt<->hyp identity mapping that maximizes
/// IDTP (equivalently minimizes IDFP + IDFN).
inline IdCounts id_metrics(const RecordList& gt, const RecordList& hyp, double threshold = 0.5) {
  if (gt.empty()) throw Error(ErrorCode::ZeroGroundTruth, "identity metrics need ground truth");
  const auto overlap = identity_overlaps(gt, hyp, threshold);
  // Only ids with some overlap can be mapped usefully.
  std::vector<int> gids, hids;
  for (const auto& [k, _] : overlap) {
    gids.push_back(k.first);
    hids.push_back(k.second);
  }
  std::sort(gids.begin(), gids.end());
  gids.erase(std::unique(gids.begin(), gids.end()), gids.end());
  std::sort(hids.begin(), hids.end());
  hids.erase(std::unique(hids.begin(), hids.end()), hids.end());

  IdCounts out;
  if (!gids.empty()) {
    CostMatrix c(gids.size(), hids.size(), 0.0);
    for (const auto& [k, n] : overlap) {
      const auto r = std::lower_bound(gids.begin(), gids.end(), k.first) - gids.begin();
      const auto q = std::lower_bound(hids.begin(), hids.end(), k.second) - hids.begin();
      c(static_cast<std::size_t>(r), static_cast<std::size_t>(q)) = -static_cast<double>(n);
    }
    const Assignment a = hungarian_assign(c, 0.0);
    for (const auto& m : a.matches) {
      const auto n = static_cast<std::int64_t>(-m.cost);
      if (n <= 0) continue;
      out.idtp += n;
      out.mapping[gids[m.row]] = hids[m.col];
    }
  }
  out.idfn = static_cast<std::int64_t>(gt.size()) - out.idtp;
  out.idfp = static_cast<std::int64_t>(hyp.size()) - out.idtp;
  out.idf1 = idf1_from(out.idtp, out.idfp, out.idfn);
  return out;
}

enum class ApInterpolation { AllPoint, Point101 };

struct DetectionScores {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
};

/// Area under the precision envelope for a ranked TP/FP sequence.
inline double average_precision(const std::vector<bool>& ranked_tp, std::int64_t n_gt,
                                ApInterpolation interp = ApInterpolation::AllPoint) {
  if (n_gt <= 0) return 0.0;
  std::vector<double> rec, prec;
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
    tp += ranked_tp[i] ? 1 : 0;
    rec.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    prec.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = prec.size(); i-- > 1;) prec[i - 1] = std::max(prec[i - 1], prec[i]);
  if (interp == ApInterpolation::Point101) {
    double sum = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double r = k / 100.0;
      const auto it = std::lower_bound(rec.begin(), rec.end(), r - 1e-12);
      if (it != rec.end()) sum += prec[static_cast<std::size_t>(it - rec.begin())];
    }
    return sum / 101.0;
  }
  double ap = 0.0, prev_r = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    ap += (rec[i] - prev_r) * prec[i];
    prev_r = rec[i];
  }
  return ap;
}

/// Single-class detection scoring: detections ranked by confidence (ties keep
/// input order) claim the best unclaimed gt box of their frame at IoU >= threshold.
inline DetectionScores detection_pr(const RecordList& dets, const RecordList& gt, double iou_threshold,
                                    ApInterpolation interp = ApInterpolation::AllPoint) {
  auto gt_frames = by_frame(gt);
  std::map<int, std::vector<bool>> claimed;
  for (const auto& [f, g] : gt_frames) claimed[f].assign(g.size(), false);
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  std::vector<bool> ranked;
  ranked.reserve(order.size());
  DetectionScores s;
  for (std::size_t idx : order) {
    const auto& d = dets[idx];
    bool hit = false;
    const auto git = gt_frames.find(d.frame);
    if (git != gt_frames.end()) {
      double best = -1.0;
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < git->second.size(); ++k) {
        if (claimed[d.frame][k]) continue;
        const double v = box_iou(d.bbox, git->second[k].bbox);
        if (v >= iou_threshold && v > best) {
          best = v;
          best_k = k;
        }
      }
      if (best >= 0.0) {
        claimed[d.frame][best_k] = true;
        hit = true;
      }
    }
    ranked.push_back(hit);
    (hit ? s.tp : s.fp) += 1;
  }
  const auto n_gt = static_cast<std::int64_t>(gt.size());
  s.fn = n_gt - s.tp;
  s.precision = (s.tp + s.fp) > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
  s.recall = n_gt > 0 ? static_cast<double>(s.tp) / static_cast<double>(n_gt) : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.ap = average_precision(ranked, n_gt, interp);
  return s;
}

/// Mean of per-class APs; with a single class this is that class's AP.
inline double mean_average_precision(std::span<const double> per_class_ap) {
  if (per_class_ap.empty()) return 0.0;
  return std::accumulate(per_class_ap.begin(), per_class_ap.end(), 0.0) / static_cast<double>(per_class_ap.size());
}

inline std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(0.5 + 0.05 * k);
  return t;
}

struct EvaluationReport {
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
  double deta = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<double, double>> ap_per_threshold;
  double map50 = 0.0;
  double map50_95 = 0.0;
  ClearCounts clear;
  IdCounts ids;
  std::int64_t hyp_boxes = 0;
  double match_threshold = 0.5;
  FrameMatching matching;
};

inline EvaluationReport evaluate(const RecordList& gt, const RecordList& hyp, double match_threshold = 0.5,
                                 ApInterpolation interp = ApInterpolation::AllPoint) {
  EvaluationReport r;
  r.match_threshold = match_threshold;
  r.matching = match_frames(gt, hyp, match_threshold);
  r.clear = r.matching.counts;
  r.mota = mota(r.clear);
  r.motp = r.clear.tp > 0 ? motp(r.matching) : 1.0;
  r.deta = deta(r.clear);
  r.ids = id_metrics(gt, hyp, match_threshold);
  r.idf1 = r.ids.idf1;
  r.hyp_boxes = static_cast<std::int64_t>(hyp.size());
  const DetectionScores at50 = detection_pr(hyp, gt, match_threshold, interp);
  r.precision = at50.precision;
  r.recall = at50.recall;
  r.f1 = at50.f1;
  std::vector<double> aps;
  for (double t : coco_thresholds()) {
    const double ap = (t == match_threshold) ? at50.ap : detection_pr(hyp, gt, t, interp).ap;
    r.ap_per_threshold.emplace_back(t, ap);
    aps.push_back(ap);
  }
  const double single[] = {r.ap_per_threshold.front().second};
  r.map50 = mean_average_precision(single);
  r.map50_95 = mean_average_precision(aps);
  return r;
}

inline nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json ap = nlohmann::json::object();
  for (const auto& [t, v] : r.ap_per_threshold) {
    char key[16];
    std::snprintf(key, sizeof key, "%.2f", t);
    ap[key] = v;
  }
  return {
      {"motp_distance", "1 - IoU"},
      {"match_threshold", r.match_threshold},
      {"mota", r.mota},
      {"motp", r.motp},
      {"idf1", r.idf1},
      {"deta", r.deta},
      {"precision", r.precision},
      {"recall", r.recall},
      {"f1", r.f1},
      {"ap_per_threshold", ap},
      {"map50", r.map50},
      {"map50_95", r.map50_95},
      {"counts",
       {{"tp", r.clear.tp},
        {"fp", r.clear.fp},
        {"fn", r.clear.fn},
        {"idsw", r.clear.idsw},
        {"gt", r.clear.gt},
        {"hyp", r.hyp_boxes},
        {"idtp", r.ids.idtp},
        {"idfp", r.ids.idfp},
        {"idfn", r.ids.idfn}}},
  };
}

inline std::string format_table(const EvaluationReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-8s %-8s %-8s %-8s %-8s %-8s %-8s %-8s\n"
                "%7.2f%% %8.4f %7.2f%% %8.4f %8lld %8lld %8lld %8lld\n"
                "precision %.4f  recall %.4f  f1 %.4f  mAP50 %.4f  mAP50-95 %.4f\n",
                "MOTA", "MOTP", "IDF1", "DetA", "FP", "FN", "IDSW", "GT", 100.0 * r.mota, r.motp, 100.0 * r.idf1,
                r.deta, static_cast<long long>(r.clear.fp), static_cast<long long>(r.clear.fn),
                static_cast<long long>(r.clear.idsw), static_cast<long long>(r.clear.gt), r.precision, r.recall,
                r.f1, r.map50, r.map50_95);
  return buf;
}

inline std::string format_frame_diagnostics(const FrameMatching& m) {
  std::string out = "frame,tp,fp,fn,idsw\n";
  for (const auto& f : m.frames) {
    out += std::to_string(f.frame + 1) + ',' + std::to_string(f.pairs.size()) + ',' + std::to_string(f.fp) + ',' +
           std::to_string(f.fn) + ',' + std::to_string(f.idsw) + '\n';
  }
  return out;
}

}  // namespace planartrack::metrics
