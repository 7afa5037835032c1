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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "planartrack/assignment.hpp"
#include "planartrack/core.hpp"
#include "planartrack/ingest.hpp"
#include "planartrack/kalman.hpp"
#include "planartrack/mask.hpp"

namespace planartrack {

struct TrackerConfig {
  double cutoff_cost = 0.6;
  int max_gap = 15;
  int min_hits = 3;
  bool closed_world = true;
  double process_noise = 1e-2;
  double measurement_noise = 1.0;
  double initial_velocity_variance = 100.0;
  // Closed world only. 0 fixes the identity set at the first frame; N > 0 caps
  // the first-frame seeds at the N most confident detections and lets later
  // candidates fill empty slots once they survive min_hits frames. Either way a
  // candidate that survives min_hits frames while some identity is lost takes
  // over that identity.
  int population = 0;
  // Emit predicted boxes for confirmed tracks that are coasting within max_gap.
  bool emit_coasting = true;

  KalmanNoise noise() const { return {process_noise, measurement_noise, initial_velocity_variance}; }

  void validate() const {
    if (!(cutoff_cost > 0.0 && cutoff_cost <= 1.0)) throw Error(ErrorCode::InvalidArgument, "cutoff_cost must be in (0, 1]");
    if (max_gap < 0) throw Error(ErrorCode::InvalidArgument, "max_gap must be >= 0");
    if (min_hits < 1) throw Error(ErrorCode::InvalidArgument, "min_hits must be >= 1");
    if (population < 0) throw Error(ErrorCode::InvalidArgument, "population must be >= 0");
    if (!(process_noise >= 0.0) || !(measurement_noise > 0.0) || !(initial_velocity_variance > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "noise parameters must be positive");
    }
  }
};

enum class TrackStatus { Tentative, Confirmed, Lost };

constexpr const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Lost: return "lost";
  }
  return "?";
}

struct Track {
  int id = 0;
  KalmanState state;
  Box last_box;                    // last accepted region's box
  std::optional<SpanMask> last_mask;
  Point2 last_centroid;            // centroid of the last accepted region
  double last_confidence = 1.0;
  TrackStatus status = TrackStatus::Tentative;
  int consecutive_hits = 0;
  int gap = 0;
  int total_hits = 0;
  int first_frame = 0;
  int last_matched_frame = 0;
  std::vector<std::pair<int, Box>> history;  // accepted boxes

  /// Shift that moves the last accepted region onto the current state estimate.
  Point2 offset() const { return state.position() - last_centroid; }
  Box predicted_box() const { return last_box.translated(offset()); }

  Region predicted_region() const {
    if (last_mask && !last_mask->empty()) {
      const Point2 d = offset();
      return translate(*last_mask, static_cast<int>(std::lround(d.x)), static_cast<int>(std::lround(d.y)));
    }
    return predicted_box();
  }
};

/// C_ij = 1 - IoU(predicted region of track i, region of detection j), clamped to [0, 1].
inline CostMatrix build_cost_matrix(std::span<const Track> tracks, std::span<const DetectionRecord> dets) {
  CostMatrix c(tracks.size(), dets.size(), 1.0);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    // One pixel of slack around the predicted box.
    const Box pb = tracks[i].predicted_box();
    const Box gate{pb.left - 1.0, pb.top - 1.0, pb.width + 2.0, pb.height + 2.0};
    std::optional<Region> pr;
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (intersection_area(gate, dets[j].bbox) <= 0.0) continue;
      if (!pr) pr = tracks[i].predicted_region();
      const Region dr = dets[j].region();
      double iou = 0.0;
      if (const auto* m = std::get_if<SpanMask>(&*pr); m && m->empty()) {
        iou = 0.0;  // prediction left the frame entirely
      } else {
        iou = region_iou(*pr, dr);
      }
      c(i, j) = std::clamp(1.0 - iou, 0.0, 1.0);
    }
  }
  return c;
}

struct TrackSnapshot {
  int id = 0;
  TrackStatus status = TrackStatus::Tentative;
  Box box;
  int gap = 0;
  int consecutive_hits = 0;
};

struct FrameResult {
  int frame = 0;
  struct Association {
    int track_id = 0;
    std::size_t det_index = 0;
    double cost = 0.0;
  };
  std::vector<Association> matches;
  std::vector<std::size_t> discarded;  // detection indices dropped (closed world)
  std::vector<TrackSnapshot> tracks;
  RecordList emitted;                  // track output rows for this frame
};

struct TrackLifespan {
  int id = 0;
  int first_frame = 0;
  int last_matched_frame = 0;
  int hits = 0;
  TrackStatus status = TrackStatus::Tentative;
};

/// Tracking-by-detection state machine: constant-velocity Kalman prediction,
/// gated Hungarian association on 1 - IoU and track lifecycle management.
/// step() must see frames in strictly increasing order.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const TrackerConfig& config() const { return cfg_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  std::size_t discarded_count() const { return discarded_; }
  int frames_processed() const { return frames_; }

  FrameResult step(int frame_index, std::span<const DetectionRecord> dets) {
    if (last_frame_ && frame_index <= *last_frame_) {
      throw Error(ErrorCode::NonMonotonicFrameIndex, "frame " + std::to_string(frame_index) +
                                                         " after frame " + std::to_string(*last_frame_));
    }
    const KalmanNoise noise = cfg_.noise();
    FrameResult result;
    result.frame = frame_index;
    const bool first = !last_frame_.has_value();
    last_frame_ = frame_index;
    ++frames_;

    for (auto& t : tracks_) t.state = kf_predict(t.state, noise);

    const CostMatrix cost = build_cost_matrix(tracks_, dets);
    const Assignment a = hungarian_assign(cost, cfg_.cutoff_cost);

    for (const auto& m : a.matches) {
      Track& t = tracks_[m.row];
      const DetectionRecord& d = dets[m.col];
      t.state = kf_update(t.state, d.centroid(), noise);
      t.last_box = d.bbox;
      t.last_mask = d.mask;
      t.last_centroid = d.centroid();
      t.last_confidence = d.confidence;
      t.consecutive_hits += 1;
      t.total_hits += 1;
      t.gap = 0;
      t.last_matched_frame = frame_index;
      if (t.status == TrackStatus::Lost) t.status = TrackStatus::Confirmed;
      if (t.status == TrackStatus::Tentative && t.consecutive_hits >= cfg_.min_hits && !cfg_.closed_world) {
        t.status = TrackStatus::Confirmed;
      }
      t.history.emplace_back(frame_index, d.bbox);
      if (t.id != 0) result.matches.push_back({t.id, m.col, m.cost});
    }

    for (std::size_t r : a.unmatched_rows) {
      Track& t = tracks_[r];
      t.gap += 1;
      t.consecutive_hits = 0;
      if (t.gap > cfg_.max_gap && t.status == TrackStatus::Confirmed) t.status = TrackStatus::Lost;
    }
    prune();
    if (cfg_.closed_world) adopt_candidates();

    handle_unmatched_detections(frame_index, dets, a.unmatched_cols, first, result);
    if (cfg_.closed_world && open_homes() == 0) {
      std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Tentative; });
    }

    for (const auto& t : tracks_) {
      const Box box = t.gap == 0 ? t.last_box : t.predicted_box();
      result.tracks.push_back({t.id, t.status, box, t.gap, t.consecutive_hits});
      if (t.status != TrackStatus::Confirmed) continue;
      if (t.gap > 0 && !(cfg_.emit_coasting && t.gap <= cfg_.max_gap)) continue;
      DetectionRecord out;
      out.frame = frame_index;
      out.id = t.id;
      out.bbox = box;
      out.confidence = t.last_confidence;
      result.emitted.push_back(out);
    }
    return result;
  }

  std::vector<TrackLifespan> lifespans() const {
    std::vector<TrackLifespan> out = retired_;
    for (const auto& t : tracks_) {
      if (t.id > 0 && t.total_hits > 0) out.push_back({t.id, t.first_frame, t.last_matched_frame, t.total_hits, t.status});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
  }

 private:
  std::size_t confirmed_count() const {
    return static_cast<std::size_t>(std::count_if(tracks_.begin(), tracks_.end(),
                                                  [](const Track& t) { return t.status != TrackStatus::Tentative; }));
  }

  /// Identities a closed-world candidate could still take: lost tracks plus
  /// unfilled population slots.
  std::size_t open_homes() const {
    const auto lost = static_cast<std::size_t>(
        std::count_if(tracks_.begin(), tracks_.end(), [](const Track& t) { return t.status == TrackStatus::Lost; }));
    const std::size_t slots = cfg_.population > 0 && confirmed_count() < static_cast<std::size_t>(cfg_.population)
                                  ? static_cast<std::size_t>(cfg_.population) - confirmed_count()
                                  : 0;
    return lost + slots;
  }

  /// Closed world: a candidate with min_hits consecutive matches takes over the
  /// lost identity last seen nearest to it, or else fills a free slot.
  void adopt_candidates() {
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      Track& c = tracks_[i];
      if (c.status != TrackStatus::Tentative || c.consecutive_hits < cfg_.min_hits) continue;
      std::optional<std::size_t> home;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < tracks_.size(); ++k) {
        if (tracks_[k].status != TrackStatus::Lost) continue;
        const double dist = norm(tracks_[k].last_centroid - c.last_centroid);
        if (dist < best) best = dist, home = k;
      }
      if (home) {
        Track& lost = tracks_[*home];
        c.id = lost.id;
        c.first_frame = lost.first_frame;
        c.total_hits += lost.total_hits;
        c.history.insert(c.history.begin(), lost.history.begin(), lost.history.end());
        c.status = TrackStatus::Confirmed;
        tracks_.erase(tracks_.begin() + static_cast<std::ptrdiff_t>(*home));
        if (*home < i) --i;
      } else if (cfg_.population > 0 && confirmed_count() < static_cast<std::size_t>(cfg_.population)) {
        c.id = next_id_++;
        c.status = TrackStatus::Confirmed;
      }
    }
    std::stable_sort(tracks_.begin(), tracks_.end(), [](const Track& a, const Track& b) {
      return (a.id == 0 ? std::numeric_limits<int>::max() : a.id) < (b.id == 0 ? std::numeric_limits<int>::max() : b.id);
    });
  }

  void prune() {
    auto dead = [&](const Track& t) {
      if (!cfg_.closed_world) return t.gap > cfg_.max_gap;
      // Closed world: only slot candidates (tentative) die, and on their first miss.
      return t.status == TrackStatus::Tentative && t.gap > 0;
    };
    for (const auto& t : tracks_) {
      if (dead(t) && t.status != TrackStatus::Tentative) {
        retired_.push_back({t.id, t.first_frame, t.last_matched_frame, t.total_hits, TrackStatus::Lost});
      }
    }
    std::erase_if(tracks_, dead);
  }

  Track spawn(int frame_index, const DetectionRecord& d, TrackStatus status, bool with_id = true) {
    Track t;
    t.id = with_id ? next_id_++ : 0;
    t.state = kf_init(d.centroid(), cfg_.noise());
    t.last_box = d.bbox;
    t.last_mask = d.mask;
    t.last_centroid = d.centroid();
    t.last_confidence = d.confidence;
    t.status = status;
    t.consecutive_hits = 1;
    t.total_hits = 1;
    t.first_frame = frame_index;
    t.last_matched_frame = frame_index;
    t.history.emplace_back(frame_index, d.bbox);
    if (t.status == TrackStatus::Tentative && t.consecutive_hits >= cfg_.min_hits) t.status = TrackStatus::Confirmed;
    return t;
  }

  void handle_unmatched_detections(int frame_index, std::span<const DetectionRecord> dets,
                                   const std::vector<std::size_t>& unmatched, bool first, FrameResult& result) {
    if (!cfg_.closed_world) {
      for (std::size_t j : unmatched) tracks_.push_back(spawn(frame_index, dets[j], TrackStatus::Tentative));
      return;
    }
    if (first) {
      std::vector<std::size_t> seeds = unmatched;
      if (cfg_.population > 0 && seeds.size() > static_cast<std::size_t>(cfg_.population)) {
        std::stable_sort(seeds.begin(), seeds.end(),
                         [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
        for (std::size_t k = static_cast<std::size_t>(cfg_.population); k < seeds.size(); ++k) {
          result.discarded.push_back(seeds[k]);
        }
        seeds.resize(static_cast<std::size_t>(cfg_.population));
        std::sort(seeds.begin(), seeds.end());
      }
      for (std::size_t j : seeds) tracks_.push_back(spawn(frame_index, dets[j], TrackStatus::Confirmed));
      discarded_ += result.discarded.size();
      return;
    }
    const bool homes = open_homes() > 0;
    for (std::size_t j : unmatched) {
      if (homes) {
        tracks_.push_back(spawn(frame_index, dets[j], TrackStatus::Tentative, false));
      } else {
        result.discarded.push_back(j);
      }
    }
    discarded_ += result.discarded.size();
  }

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::vector<TrackLifespan> retired_;
  int next_id_ = 1;
  int frames_ = 0;
  std::size_t discarded_ = 0;
  std::optional<int> last_frame_;
};

struct TrackingRun {
  RecordList tracks;  // emitted rows, frame-major then track id
  std::size_t discarded = 0;
  int frames = 0;
  std::vector<TrackLifespan> lifespans;
};

/// Runs the tracker over a whole record list. Frames with no detections
/// between the first and last frame are still stepped so tracks coast.
inline TrackingRun run_tracker(const RecordList& detections, const TrackerConfig& cfg,
                               std::optional<int> last_frame = std::nullopt) {
  Tracker tracker(cfg);
  TrackingRun run;
  const auto frames = by_frame(detections);
  if (frames.empty() && !last_frame) return run;
  const int begin = frames.empty() ? 0 : frames.begin()->first;
  const int end = std::max(frames.empty() ? -1 : frames.rbegin()->first, last_frame.value_or(-1));
  static const RecordList empty;
  for (int f = begin; f <= end; ++f) {
    const auto it = frames.find(f);
    const RecordList& dets = it == frames.end() ? empty : it->second;
    auto res = tracker.step(f, dets);
    std::sort(res.emitted.begin(), res.emitted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    run.tracks.insert(run.tracks.end(), res.emitted.begin(), res.emitted.end());
  }
  run.discarded = tracker.discarded_count();
  run.frames = tracker.frames_processed();
  run.lifespans = tracker.lifespans();
  return run;
}

}  // namespace planartrack
