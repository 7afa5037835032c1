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
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "planartrack/core.hpp"
#include "planartrack/geometry.hpp"
#include "planartrack/ingest.hpp"
#include "planartrack/mask.hpp"
#include "planartrack/raster.hpp"

// Coordinates are continuous: pixel (c, r) covers [c, c+1) x [r, r+1) and its
// center sits at (c + 0.5, r + 0.5).

namespace planartrack {

struct CropRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(Point2 p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height; }
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

/// Per-camera chain: raw pixel -> undistort -> subtract crop origin -> homography -> canvas.
struct CameraConfig {
  std::string camera_id;
  CropRect crop;
  DistortionModel distortion;
  Homography homography;

  Point2 source_to_canvas(Point2 p) const {
    const Point2 u = undistort_point(distortion, p) - Point2{static_cast<double>(crop.x), static_cast<double>(crop.y)};
    return apply_homography(homography, u);
  }

  /// Canvas point to (cropped) coordinates; callers test crop containment on the result.
  Point2 canvas_to_cropped(const Homography& inverse, Point2 q) const { return apply_homography(inverse, q); }

  Point2 cropped_to_source(Point2 u) const {
    return distort_point(distortion, u + Point2{static_cast<double>(crop.x), static_cast<double>(crop.y)});
  }
};

enum class BlendMode { FeatherAlpha };

struct MosaicLayout {
  int canvas_width = 2224;
  int canvas_height = 1084;
  std::vector<CameraConfig> cameras;
  int feather_px = 10;
  BlendMode blend_mode = BlendMode::FeatherAlpha;

  void validate() const {
    if (canvas_width <= 0 || canvas_height <= 0) throw Error(ErrorCode::InvalidArgument, "canvas dimensions must be positive");
    if (feather_px < 0) throw Error(ErrorCode::InvalidArgument, "feather_px must be >= 0");
    std::set<std::string> ids;
    for (const auto& c : cameras) {
      if (!ids.insert(c.camera_id).second) throw Error(ErrorCode::InvalidArgument, "duplicate camera_id " + c.camera_id);
      if (c.crop.width <= 0 || c.crop.height <= 0) throw Error(ErrorCode::InvalidArgument, "empty crop for " + c.camera_id);
      (void)invert_homography(c.homography);
    }
  }

  const CameraConfig* find(const std::string& id) const {
    for (const auto& c : cameras)
      if (c.camera_id == id) return &c;
    return nullptr;
  }
};

namespace detail {

// Values within this distance of an integer are snapped to it.
inline double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

inline double bilinear(const Raster& src, double x, double y, int ch) {
  x = std::clamp(snap(x), 0.0, static_cast<double>(src.width - 1));
  y = std::clamp(snap(y), 0.0, static_cast<double>(src.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, src.width - 1);
  const int y1 = std::min(y0 + 1, src.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * src.at(x0, y0, ch) + fx * (1 - fy) * src.at(x1, y0, ch) +
         (1 - fx) * fy * src.at(x0, y1, ch) + fx * fy * src.at(x1, y1, ch);
}

inline std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace detail

/// Inverse-mapping warp of one camera frame onto the canvas. A canvas pixel is
/// valid exactly when its center maps inside the crop (and the source frame).
inline Raster warp_raster(const Raster& src, const CameraConfig& cfg, const MosaicLayout& layout) {
  const Homography inv = invert_homography(cfg.homography);
  Raster out(layout.canvas_width, layout.canvas_height, src.channels);
  std::vector<std::uint8_t> valid(out.pixel_count(), 0);
  std::size_t n_valid = 0;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      Point2 u;
      try {
        u = apply_homography(inv, {x + 0.5, y + 0.5});
      } catch (const Error&) {
        continue;
      }
      u = {detail::snap(u.x), detail::snap(u.y)};
      if (!cfg.crop.contains(u)) continue;
      const Point2 s = cfg.cropped_to_source(u);
      if (!(s.x >= 0.0 && s.y >= 0.0 && s.x < src.width && s.y < src.height)) continue;
      for (int ch = 0; ch < src.channels; ++ch) {
        out.at(x, y, ch) = detail::to_u8(detail::bilinear(src, s.x - 0.5, s.y - 0.5, ch));
      }
      valid[out.index(x, y)] = 1;
      ++n_valid;
    }
  }
  if (n_valid == 0) throw Error(ErrorCode::EmptyFootprint, "camera " + cfg.camera_id + " covers no canvas pixel");
  out.validity = std::move(valid);
  return out;
}

namespace detail {

// 1-D squared distance transform (lower envelope of parabolas).
inline void edt_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    // z[0] is -inf, so the first parabola is never popped.
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Euclidean distance from every pixel to the nearest pixel where `features`
/// is non-zero (infinity when there is none).
inline std::vector<double> distance_transform(std::span<const std::uint8_t> features, int width, int height) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) grid[i] = features[i] ? 0.0 : inf;
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> f(std::max(width, height)), d(std::max(width, height));
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[y] = grid[static_cast<std::size_t>(y) * width + x];
    detail::edt_1d(std::span(f.data(), height), std::span(d.data(), height), v, z);
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = d[y];
  }
  for (int y = 0; y < height; ++y) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y) * width, width, f.begin());
    detail::edt_1d(std::span(f.data(), width), std::span(d.data(), width), v, z);
    std::copy_n(d.begin(), width, grid.begin() + static_cast<std::ptrdiff_t>(y) * width);
  }
  for (auto& g : grid) g = std::sqrt(g);
  return grid;
}

struct OverlapDecision {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t first_count = 0;   // valid pixels of `first` inside the bounding-box intersection
  std::size_t second_count = 0;
  std::size_t feathered = 0;     // index of the view that receives the alpha ramp
};

namespace detail {

struct PixelBounds {
  int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max(), x1 = -1, y1 = -1;
  bool empty() const { return x1 < x0; }
};

inline PixelBounds valid_bounds(const Raster& r) {
  PixelBounds b;
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      if (r.valid(x, y)) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

}  // namespace detail

/// Pairwise overlap analysis: for every pair of views whose validity regions
/// share a pixel, counts each view's valid pixels inside the intersection of
/// their valid bounding boxes; the view with fewer gets feathered (ties go to
/// the smaller camera_id).
inline std::vector<OverlapDecision> plan_overlaps(std::span<const Raster> warped, std::span<const std::string> ids) {
  std::vector<detail::PixelBounds> bounds;
  for (const auto& r : warped) bounds.push_back(detail::valid_bounds(r));
  std::vector<OverlapDecision> out;
  for (std::size_t i = 0; i < warped.size(); ++i) {
    for (std::size_t j = i + 1; j < warped.size(); ++j) {
      const auto& bi = bounds[i];
      const auto& bj = bounds[j];
      if (bi.empty() || bj.empty()) continue;
      const int x0 = std::max(bi.x0, bj.x0), x1 = std::min(bi.x1, bj.x1);
      const int y0 = std::max(bi.y0, bj.y0), y1 = std::min(bi.y1, bj.y1);
      if (x0 > x1 || y0 > y1) continue;
      std::size_t ci = 0, cj = 0;
      bool shared = false;
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const bool vi = warped[i].valid(x, y), vj = warped[j].valid(x, y);
          ci += vi;
          cj += vj;
          shared = shared || (vi && vj);
        }
      if (!shared) continue;
      OverlapDecision d{i, j, ci, cj, 0};
      if (ci != cj) d.feathered = ci < cj ? i : j;
      else d.feathered = ids[i] <= ids[j] ? i : j;
      out.push_back(d);
    }
  }
  return out;
}

/// Blends canvas-sized warped views. Inside each pairwise overlap the feathered
/// view's weight ramps linearly from 1 (feather_px or more from its validity
/// boundary) toward 0 at the boundary; output = sum(alpha * v) / sum(alpha).
inline Raster compose_mosaic(std::span<const Raster> warped, const MosaicLayout& layout) {
  if (warped.empty()) throw Error(ErrorCode::InvalidArgument, "no views to compose");
  if (warped.size() != layout.cameras.size()) {
    throw Error(ErrorCode::InvalidArgument, "number of views does not match the layout's cameras");
  }
  const int w = layout.canvas_width, h = layout.canvas_height;
  const int channels = warped.front().channels;
  for (const auto& r : warped) {
    if (r.width != w || r.height != h || r.channels != channels) {
      throw Error(ErrorCode::InvalidArgument, "views must be canvas-sized with equal channel counts");
    }
  }
  std::vector<std::string> ids;
  for (const auto& c : layout.cameras) ids.push_back(c.camera_id);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::vector<float>> alpha(warped.size(), std::vector<float>(n, 1.0f));
  if (layout.feather_px > 0) {
    std::vector<std::optional<std::vector<double>>> dist(warped.size());
    for (const auto& d : plan_overlaps(warped, ids)) {
      const std::size_t f = d.feathered;
      const std::size_t other = f == d.first ? d.second : d.first;
      if (!dist[f]) {
        std::vector<std::uint8_t> invalid(n);
        for (std::size_t i = 0; i < n; ++i) invalid[i] = warped[f].validity ? !(*warped[f].validity)[i] : 0;
        dist[f] = distance_transform(invalid, w, h);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const bool both = (!warped[f].validity || (*warped[f].validity)[i]) &&
                          (!warped[other].validity || (*warped[other].validity)[i]);
        if (!both) continue;
        const double a = std::min(1.0, (*dist[f])[i] / layout.feather_px);
        alpha[f][i] = std::min(alpha[f][i], static_cast<float>(a));
      }
    }
  }

  Raster out(w, h, channels);
  std::vector<std::uint8_t> valid(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double weight = 0.0;
    std::array<double, 4> acc{};
    for (std::size_t v = 0; v < warped.size(); ++v) {
      const auto& r = warped[v];
      if (r.validity && !(*r.validity)[i]) continue;
      weight += alpha[v][i];
      for (int ch = 0; ch < channels; ++ch) acc[ch] += alpha[v][i] * r.data[i * channels + ch];
    }
    if (weight <= 0.0) continue;
    valid[i] = 1;
    for (int ch = 0; ch < channels; ++ch) out.data[i * channels + ch] = detail::to_u8(acc[ch] / weight);
  }
  out.validity = std::move(valid);
  return out;
}

// ---------------------------------------------------------------------------
// Detections

using CanvasDetection = DetectionRecord;

/// Corner-AABB transfer of a camera detection onto the canvas. A source-frame
/// mask is resampled by inverse mapping the canvas cells inside the new box.
inline CanvasDetection map_detection_to_canvas(const DetectionRecord& det, const CameraConfig& cfg, int canvas_width,
                                               int canvas_height) {
  const Box& b = det.bbox;
  const std::array<Point2, 4> corners{{{b.left, b.top}, {b.right(), b.top}, {b.left, b.bottom()}, {b.right(), b.bottom()}}};
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& c : corners) {
    const Point2 q = cfg.source_to_canvas(c);
    x0 = std::min(x0, q.x);
    y0 = std::min(y0, q.y);
    x1 = std::max(x1, q.x);
    y1 = std::max(y1, q.y);
  }
  CanvasDetection out = det;
  out.camera_id = cfg.camera_id;
  out.bbox = Box::from_corners(x0, y0, x1, y1);
  out.mask.reset();
  if (det.mask) {
    const Homography inv = invert_homography(cfg.homography);
    SpanMask m{canvas_width, canvas_height, {}};
    const int c0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int c1 = std::min(canvas_width - 1, static_cast<int>(std::ceil(x1)));
    const int r0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int r1 = std::min(canvas_height - 1, static_cast<int>(std::ceil(y1)));
    const BinaryGrid grid = decode_rle(to_rle(*det.mask));
    for (int c = c0; c <= c1; ++c) {
      int run_begin = -1;
      for (int r = r0; r <= r1 + 1; ++r) {
        bool set = false;
        if (r <= r1) {
          try {
            const Point2 s = cfg.cropped_to_source(apply_homography(inv, {c + 0.5, r + 0.5}));
            const int sc = static_cast<int>(std::floor(s.x)), sr = static_cast<int>(std::floor(s.y));
            set = sc >= 0 && sr >= 0 && sc < grid.width && sr < grid.height && grid.at(sc, sr);
          } catch (const Error&) {
          }
        }
        if (set && run_begin < 0) run_begin = r;
        if (!set && run_begin >= 0) {
          m.spans.push_back({c, run_begin, r});
          run_begin = -1;
        }
      }
    }
    out.mask = std::move(m);
  }
  return out;
}

/// Cross-camera duplicate removal on one frame. Greedy by descending confidence
/// (then larger area, then smaller camera_id); a survivor suppresses detections
/// from other cameras with IoU >= threshold. Same-camera pairs never interact.
inline std::vector<CanvasDetection> dedupe_canvas_detections(std::span<const CanvasDetection> dets,
                                                             double iou_threshold = 0.5) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].confidence != dets[b].confidence) return dets[a].confidence > dets[b].confidence;
    if (dets[a].bbox.area() != dets[b].bbox.area()) return dets[a].bbox.area() > dets[b].bbox.area();
    return dets[a].camera_id.value_or("") < dets[b].camera_id.value_or("");
  });
  std::vector<bool> removed(dets.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (removed[i]) continue;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (removed[j] || dets[i].camera_id == dets[j].camera_id) continue;
      if (box_iou(dets[i].bbox, dets[j].bbox) >= iou_threshold) removed[j] = true;
    }
  }
  std::vector<CanvasDetection> out;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (!removed[i]) out.push_back(dets[i]);
  return out;
}

}  // namespace planartrack
