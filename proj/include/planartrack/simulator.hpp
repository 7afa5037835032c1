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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planartrack/core.hpp"
#include "planartrack/geometry.hpp"
#include "planartrack/ingest.hpp"
#include "planartrack/mask.hpp"
#include "planartrack/mosaic.hpp"

namespace planartrack::sim {

/// SplitMix64 in counter mode: output n of stream `key` is mix(key + n * gamma).
/// Any (key, n) can be evaluated independently, so per-object and per-frame
/// streams never interfere with each other.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Key for an independent stream derived from a master seed, a purpose tag and an index.
  static std::uint64_t derive(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    std::uint64_t h = mix(seed + kGamma);
    for (unsigned char c : tag) h = mix(h ^ c);
    return mix(h ^ mix(index + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  /// Standard normal via Box-Muller; one variate per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Knuth's product method; adequate for the small rates used here.
  int poisson(double rate) {
    if (rate <= 0.0) return 0;
    const double limit = std::exp(-rate);
    int k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct MotionConfig {
  double max_speed = 4.0;            // canvas px per frame
  double waypoint_pause_prob = 0.3;
  double smoothness = 0.7;           // heading smoothing in [0, 1)
  double max_turn_rate = 0.05;       // rad per frame
  int pause_min_frames = 10;
  int pause_max_frames = 60;
};

struct NoiseConfig {
  double centroid_sigma = 0.0;       // px
  double size_sigma_frac = 0.0;
  double miss_prob = 0.0;
  double clutter_rate = 0.0;         // Poisson mean per frame
  double occlusion_merge_iou = 0.0;  // <= 0 disables occlusion dropout
};

struct Footprint {
  double length = 120.0;
  double width = 45.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  int n_objects = 10;
  Box pen{40.0, 40.0, 2144.0, 1004.0};
  int n_frames = 3333;
  MosaicLayout cameras;
  MotionConfig motion;
  Footprint footprint;
  NoiseConfig noise;
  bool emit_masks = false;

  void validate() const {
    if (n_objects < 1) throw Error(ErrorCode::InvalidArgument, "n_objects must be >= 1");
    if (n_frames < 1) throw Error(ErrorCode::InvalidArgument, "n_frames must be >= 1");
    if (!(motion.max_speed >= 0.0)) throw Error(ErrorCode::InvalidArgument, "max_speed must be >= 0");
    if (!(motion.smoothness >= 0.0 && motion.smoothness < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "smoothness must be in [0, 1)");
    }
    if (!(motion.max_turn_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_turn_rate must be positive");
    if (motion.pause_min_frames < 0 || motion.pause_max_frames < motion.pause_min_frames) {
      throw Error(ErrorCode::InvalidArgument, "pause frame range is invalid");
    }
    for (double p : {motion.waypoint_pause_prob, noise.miss_prob}) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probabilities must lie in [0, 1]");
    }
    if (noise.centroid_sigma < 0.0 || noise.size_sigma_frac < 0.0 || noise.clutter_rate < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "noise magnitudes must be >= 0");
    }
    if (!(footprint.length > 0.0 && footprint.width > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "footprint dimensions must be positive");
    }
    cameras.validate();
  }
};

/// Six cameras tiling the canvas in a 3 x 2 grid; each crop maps onto its cell
/// by a pure translation.
inline MosaicLayout default_layout(int canvas_width = 2224, int canvas_height = 1084) {
  MosaicLayout layout;
  layout.canvas_width = canvas_width;
  layout.canvas_height = canvas_height;
  const std::array<int, 4> xs{0, canvas_width / 3, 2 * canvas_width / 3, canvas_width};
  const std::array<int, 3> ys{0, canvas_height / 2, canvas_height};
  int k = 0;
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 3; ++col) {
      CameraConfig cam;
      cam.camera_id = "cam" + std::to_string(++k);
      cam.crop = {20, 20, xs[col + 1] - xs[col], ys[row + 1] - ys[row]};
      cam.distortion = DistortionModel::for_image(cam.crop.width + 40, cam.crop.height + 40);
      cam.homography = Homography::from_rows({{{1, 0, double(xs[col])}, {0, 1, double(ys[row])}, {0, 0, 1}}});
      layout.cameras.push_back(cam);
    }
  }
  return layout;
}

struct Pose {
  Point2 center;
  double heading = 0.0;  // radians
};

struct GroundTruthTrajectory {
  int object_id = 0;
  std::vector<Pose> poses;  // one per frame
};

namespace detail {
inline double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}
}  // namespace detail

/// Half-diagonal of the footprint, the clearance between center and pen walls.
inline double footprint_clearance(const Footprint& f) { return 0.5 * std::hypot(f.length, f.width); }

/// Waypoint wander inside the pen, one independent stream per object.
inline std::vector<GroundTruthTrajectory> generate_trajectories(const ScenarioConfig& cfg) {
  cfg.validate();
  const double m = footprint_clearance(cfg.footprint);
  if (2.0 * m > cfg.pen.width || 2.0 * m > cfg.pen.height) {
    throw Error(ErrorCode::InfeasiblePen, "footprint does not fit inside the pen");
  }
  const double x0 = cfg.pen.left + m, x1 = cfg.pen.right() - m;
  const double y0 = cfg.pen.top + m, y1 = cfg.pen.bottom() - m;
  const auto& mo = cfg.motion;

  std::vector<GroundTruthTrajectory> out;
  for (int k = 0; k < cfg.n_objects; ++k) {
    CounterRng rng(CounterRng::derive(cfg.seed, "trajectory", static_cast<std::uint64_t>(k)));
    GroundTruthTrajectory traj;
    traj.object_id = k + 1;
    Pose pose{{rng.uniform(x0, x1), rng.uniform(y0, y1)}, rng.uniform(-std::numbers::pi, std::numbers::pi)};
    Point2 waypoint{rng.uniform(x0, x1), rng.uniform(y0, y1)};
    int pause = 0;
    traj.poses.reserve(static_cast<std::size_t>(cfg.n_frames));
    traj.poses.push_back(pose);
    for (int t = 1; t < cfg.n_frames; ++t) {
      if (pause > 0) {
        --pause;
      } else if (mo.max_speed > 0.0) {
        const Point2 to = waypoint - pose.center;
        const double dist = norm(to);
        if (dist > 1e-9) {
          const double err = detail::wrap_angle(std::atan2(to.y, to.x) - pose.heading);
          const double turn = std::clamp((1.0 - mo.smoothness) * err, -mo.max_turn_rate, mo.max_turn_rate);
          pose.heading = detail::wrap_angle(pose.heading + turn);
          // Walk forward only as far as the body is aligned with the target.
          const double align = std::max(0.0, std::cos(err - turn));
          const double step = std::min(mo.max_speed * align, dist);
          pose.center = pose.center + step * Point2{std::cos(pose.heading), std::sin(pose.heading)};
          pose.center = {std::clamp(pose.center.x, x0, x1), std::clamp(pose.center.y, y0, y1)};
        }
        if (norm(waypoint - pose.center) <= std::max(mo.max_speed, 1e-6)) {
          waypoint = {rng.uniform(x0, x1), rng.uniform(y0, y1)};
          if (rng.uniform() < mo.waypoint_pause_prob) pause = rng.uniform_int(mo.pause_min_frames, mo.pause_max_frames);
        }
      }
      traj.poses.push_back(pose);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

inline std::array<Point2, 4> footprint_corners(const Pose& p, const Footprint& f) {
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  const double hl = 0.5 * f.length, hw = 0.5 * f.width;
  const Point2 ax{c * hl, s * hl}, ay{-s * hw, c * hw};
  return {p.center + ax + ay, p.center + ax - ay, p.center - ax - ay, p.center - ax + ay};
}

inline Box corners_aabb(const std::array<Point2, 4>& pts) {
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return Box::from_corners(x0, y0, x1, y1);
}

/// Cells of a width x height grid whose centers lie inside a convex polygon.
inline SpanMask rasterize_convex(const std::array<Point2, 4>& poly, int width, int height) {
  SpanMask out{width, height, {}};
  const Box bb = corners_aabb(poly);
  const int c0 = std::max(0, static_cast<int>(std::floor(bb.left)));
  const int c1 = std::min(width - 1, static_cast<int>(std::ceil(bb.right())));
  for (int c = c0; c <= c1; ++c) {
    const double x = c + 0.5;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
      if ((a.x <= x && b.x >= x) || (b.x <= x && a.x >= x)) {
        if (a.x == b.x) {
          lo = std::min({lo, a.y, b.y});
          hi = std::max({hi, a.y, b.y});
        } else {
          const double y = a.y + (x - a.x) * (b.y - a.y) / (b.x - a.x);
          lo = std::min(lo, y);
          hi = std::max(hi, y);
        }
      }
    }
    if (!(lo <= hi)) continue;
    const int r0 = std::max(0, static_cast<int>(std::ceil(lo - 0.5)));
    const int r1 = std::min(height - 1, static_cast<int>(std::floor(hi - 0.5)));
    if (r0 <= r1) out.spans.push_back({c, r0, r1 + 1});
  }
  return out;
}

struct RenderedGroundTruth {
  RecordList canvas;                            // frame-major, object id order
  std::vector<int> attributed_camera;           // parallel to canvas; -1 = outside every camera
  std::map<std::string, RecordList> per_camera; // source-frame boxes
};

namespace detail {

inline bool in_camera(const CameraConfig& cam, const Homography& inv, Point2 q) {
  try {
    return cam.crop.contains(apply_homography(inv, q));
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

/// Renders canvas ground truth and attributes each object to the camera that
/// holds the larger share of its footprint cells.
inline RenderedGroundTruth project_and_render(const std::vector<GroundTruthTrajectory>& trajs, const MosaicLayout& layout,
                                              const Footprint& footprint, bool keep_masks = false) {
  std::vector<Homography> inverses;
  std::vector<Box> camera_bounds;
  for (const auto& cam : layout.cameras) {
    inverses.push_back(invert_homography(cam.homography));
    std::array<Point2, 4> q{};
    const double w = cam.crop.width, h = cam.crop.height;
    const std::array<Point2, 4> crop_corners{{{0, 0}, {w, 0}, {w, h}, {0, h}}};
    for (std::size_t i = 0; i < 4; ++i) q[i] = apply_homography(cam.homography, crop_corners[i]);
    camera_bounds.push_back(corners_aabb(q));
  }
  RenderedGroundTruth out;
  for (const auto& cam : layout.cameras) out.per_camera[cam.camera_id];
  const std::size_t n_frames = trajs.empty() ? 0 : trajs.front().poses.size();
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (const auto& traj : trajs) {
      const auto corners = footprint_corners(traj.poses[f], footprint);
      DetectionRecord rec;
      rec.frame = static_cast<int>(f);
      rec.id = traj.object_id;
      rec.bbox = corners_aabb(corners);
      rec.confidence = 1.0;
      std::optional<SpanMask> mask;
      auto get_mask = [&]() -> const SpanMask& {
        if (!mask) mask = rasterize_convex(corners, layout.canvas_width, layout.canvas_height);
        return *mask;
      };

      int best = -1;
      std::int64_t best_share = 0;
      for (std::size_t c = 0; c < layout.cameras.size(); ++c) {
        if (intersection_area(camera_bounds[c], rec.bbox) <= 0.0) continue;
        const auto& cam = layout.cameras[c];
        std::int64_t share = 0;
        bool all_inside = true;
        for (const auto& p : corners) all_inside = all_inside && detail::in_camera(cam, inverses[c], p);
        if (all_inside) {
          share = get_mask().area();
        } else {
          for (const auto& s : get_mask().spans)
            for (int r = s.row_begin; r < s.row_end; ++r)
              share += detail::in_camera(cam, inverses[c], {s.col + 0.5, r + 0.5});
        }
        if (share > best_share) {
          best_share = share;
          best = static_cast<int>(c);
        }
      }
      if (best >= 0) {
        const auto& cam = layout.cameras[static_cast<std::size_t>(best)];
        std::array<Point2, 4> src{};
        for (std::size_t i = 0; i < 4; ++i) {
          src[i] = cam.cropped_to_source(apply_homography(inverses[static_cast<std::size_t>(best)], corners[i]));
        }
        DetectionRecord cam_rec = rec;
        cam_rec.bbox = corners_aabb(src);
        cam_rec.camera_id = cam.camera_id;
        out.per_camera[cam.camera_id].push_back(cam_rec);
      }
      if (keep_masks) rec.mask = get_mask();
      out.canvas.push_back(std::move(rec));
      out.attributed_camera.push_back(best);
    }
  }
  return out;
}

struct CorruptedDetections {
  RecordList detections;        // frame-major
  std::vector<int> source_id;   // gt object id per detection, -1 for clutter
  std::int64_t missed = 0;      // dropped by miss_prob
  std::int64_t occluded = 0;    // dropped by occlusion
  std::int64_t clutter = 0;
};

namespace detail {
inline std::optional<Box> clip_to_canvas(const Box& b, int w, int h) {
  const double x0 = std::clamp(b.left, 0.0, double(w)), x1 = std::clamp(b.right(), 0.0, double(w));
  const double y0 = std::clamp(b.top, 0.0, double(h)), y1 = std::clamp(b.bottom(), 0.0, double(h));
  if (!(x1 > x0 && y1 > y0)) return std::nullopt;
  return Box::from_corners(x0, y0, x1, y1);
}
}  // namespace detail

/// Turns ground truth into detector-like output. Every frame draws from its own
/// stream, and every gt box consumes the same number of variates whatever its
/// fate, so outputs stay stable under small config changes.
inline CorruptedDetections corrupt(const RecordList& gt, const NoiseConfig& noise, std::uint64_t seed, const Box& pen,
                                   const Footprint& footprint, int canvas_width, int canvas_height) {
  CorruptedDetections out;
  for (const auto& [frame, recs] : by_frame(gt)) {
    CounterRng rng(CounterRng::derive(seed, "corrupt", static_cast<std::uint64_t>(frame)));
    std::vector<bool> occluded(recs.size(), false);
    if (noise.occlusion_merge_iou > 0.0) {
      for (std::size_t i = 0; i < recs.size(); ++i)
        for (std::size_t j = i + 1; j < recs.size(); ++j) {
          if (box_iou(recs[i].bbox, recs[j].bbox) < noise.occlusion_merge_iou) continue;
          const bool drop_first = rng.uniform() < 0.5;
          occluded[drop_first ? i : j] = true;
        }
    }
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double u_miss = rng.uniform();
      const double jx = rng.normal(), jy = rng.normal(), js = rng.normal();
      const double conf = rng.uniform(0.8, 1.0);
      if (occluded[i]) {
        ++out.occluded;
        continue;
      }
      if (u_miss < noise.miss_prob) {
        ++out.missed;
        continue;
      }
      const Point2 shift{noise.centroid_sigma * jx, noise.centroid_sigma * jy};
      const double scale = std::max(0.05, 1.0 + noise.size_sigma_frac * js);
      const Box& b = recs[i].bbox;
      const Point2 c = b.center() + shift;
      const Box moved{c.x - 0.5 * scale * b.width, c.y - 0.5 * scale * b.height, scale * b.width, scale * b.height};
      const auto clipped = detail::clip_to_canvas(moved, canvas_width, canvas_height);
      if (!clipped) continue;
      DetectionRecord d;
      d.frame = frame;
      d.id = -1;
      d.bbox = *clipped;
      d.confidence = conf;
      if (recs[i].mask) {
        d.mask = translate(*recs[i].mask, static_cast<int>(std::lround(shift.x)), static_cast<int>(std::lround(shift.y)));
        if (d.mask->empty()) d.mask.reset();
      }
      out.detections.push_back(std::move(d));
      out.source_id.push_back(recs[i].id);
    }
    const int n_clutter = rng.poisson(noise.clutter_rate);
    for (int k = 0; k < n_clutter; ++k) {
      const bool swap = rng.uniform() < 0.5;
      const double w = swap ? footprint.width : footprint.length;
      const double h = swap ? footprint.length : footprint.width;
      const Point2 c{rng.uniform(pen.left, pen.right()), rng.uniform(pen.top, pen.bottom())};
      const double conf = rng.uniform(0.25, 0.6);
      const auto clipped = detail::clip_to_canvas({c.x - 0.5 * w, c.y - 0.5 * h, w, h}, canvas_width, canvas_height);
      if (!clipped) continue;
      DetectionRecord d;
      d.frame = frame;
      d.bbox = *clipped;
      d.confidence = conf;
      out.detections.push_back(std::move(d));
      out.source_id.push_back(-1);
      ++out.clutter;
    }
  }
  return out;
}

struct SimulationResult {
  std::vector<GroundTruthTrajectory> trajectories;
  RenderedGroundTruth truth;
  CorruptedDetections canvas_detections;
  std::map<std::string, RecordList> camera_detections;  // source-frame boxes
};

/// Full scenario: trajectories, rendering, corruption, and routing of canvas
/// detections back into the camera that sees them.
inline SimulationResult simulate(const ScenarioConfig& cfg) {
  SimulationResult r;
  r.trajectories = generate_trajectories(cfg);
  r.truth = project_and_render(r.trajectories, cfg.cameras, cfg.footprint, cfg.emit_masks);
  r.canvas_detections = corrupt(r.truth.canvas, cfg.noise, cfg.seed, cfg.pen, cfg.footprint, cfg.cameras.canvas_width,
                                cfg.cameras.canvas_height);
  std::map<std::pair<int, int>, int> attributed;  // (frame, object id) -> camera index
  for (std::size_t i = 0; i < r.truth.canvas.size(); ++i) {
    attributed[{r.truth.canvas[i].frame, r.truth.canvas[i].id}] = r.truth.attributed_camera[i];
  }
  std::vector<Homography> inverses;
  for (const auto& cam : cfg.cameras.cameras) {
    inverses.push_back(invert_homography(cam.homography));
    r.camera_detections[cam.camera_id];
  }
  const auto& dets = r.canvas_detections.detections;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    int cam_index = -1;
    const int src = r.canvas_detections.source_id[i];
    if (src > 0) {
      cam_index = attributed[{dets[i].frame, src}];
    } else {
      for (std::size_t c = 0; c < cfg.cameras.cameras.size() && cam_index < 0; ++c) {
        if (detail::in_camera(cfg.cameras.cameras[c], inverses[c], dets[i].bbox.center())) cam_index = static_cast<int>(c);
      }
    }
    if (cam_index < 0) continue;
    const auto& cam = cfg.cameras.cameras[static_cast<std::size_t>(cam_index)];
    const Box& b = dets[i].bbox;
    std::array<Point2, 4> src_pts{};
    const std::array<Point2, 4> corners{{{b.left, b.top}, {b.right(), b.top}, {b.right(), b.bottom()}, {b.left, b.bottom()}}};
    for (std::size_t k = 0; k < 4; ++k) {
      src_pts[k] = cam.cropped_to_source(apply_homography(inverses[static_cast<std::size_t>(cam_index)], corners[k]));
    }
    DetectionRecord d = dets[i];
    d.bbox = corners_aabb(src_pts);
    d.camera_id = cam.camera_id;
    d.mask.reset();
    r.camera_detections[cam.camera_id].push_back(std::move(d));
  }
  return r;
}

}  // namespace planartrack::sim
