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

// Fixture builders shared by the unit tests and the acceptance run.

#include <array>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "planartrack/assignment.hpp"
#include "planartrack/geometry.hpp"
#include "planartrack/mosaic.hpp"

namespace fixture {

namespace pt = planartrack;

inline pt::Homography random_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return pt::Homography::from_rows({{{1.0 + 0.2 * u(rng), 0.2 * u(rng), 50.0 * u(rng)},
                                     {0.2 * u(rng), 1.0 + 0.2 * u(rng), 50.0 * u(rng)},
                                     {1e-4 * u(rng), 1e-4 * u(rng), 1.0}}});
}

inline pt::CorrespondenceSet grid_pairs(const pt::Homography& h, int n = 3, double spacing = 100.0) {
  pt::CorrespondenceSet c;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const pt::Point2 p{spacing * i, spacing * j};
      c.push_back({p, pt::apply_homography(h, p)});
    }
  return c;
}

// Straight lines in a 640x480 frame, pushed through a known distortion.
inline std::vector<pt::Polyline> distorted_lines(const pt::DistortionModel& d) {
  std::vector<pt::Polyline> lines;
  for (double y : {60.0, 140.0, 340.0, 420.0}) {
    pt::Polyline l{"h", {}};
    for (int i = 0; i <= 20; ++i) l.points.push_back(pt::distort_point(d, {20.0 + 30.0 * i, y}));
    lines.push_back(l);
  }
  for (double x : {80.0, 200.0, 440.0, 560.0}) {
    pt::Polyline l{"v", {}};
    for (int i = 0; i <= 15; ++i) l.points.push_back(pt::distort_point(d, {x, 15.0 + 30.0 * i}));
    lines.push_back(l);
  }
  return lines;
}

// Costs on a 1/1024 lattice keep every partial sum exact in binary floating point.
inline std::vector<std::vector<double>> lattice_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<int> k(0, 1024);
  std::vector<std::vector<double>> c(rows, std::vector<double>(cols));
  for (auto& row : c)
    for (auto& v : row) v = k(rng) / 1024.0;
  return c;
}

inline pt::CostMatrix to_matrix(const std::vector<std::vector<double>>& c) {
  pt::CostMatrix m(c.size(), c.empty() ? 0 : c[0].size());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t q = 0; q < m.cols(); ++q) m(r, q) = c[r][q];
  return m;
}

inline pt::Raster gradient(int w, int h, int channels = 1) {
  pt::Raster r(w, h, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) r.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c * 50) % 256);
  return r;
}

inline pt::CameraConfig camera(const std::string& id, int w, int h, const pt::Homography& hom) {
  return {id, {0, 0, w, h}, pt::DistortionModel{}, hom};
}

inline pt::Homography translation(double dx, double dy) {
  return pt::Homography::from_rows({{{1, 0, dx}, {0, 1, dy}, {0, 0, 1}}});
}

inline pt::Raster constant_view(int w, int h, std::uint8_t value, auto&& valid_fn) {
  pt::Raster r(w, h, 1);
  std::vector<std::uint8_t> v(r.pixel_count(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      r.at(x, y) = value;
      v[r.index(x, y)] = valid_fn(x, y) ? 1 : 0;
    }
  r.validity = v;
  return r;
}

// The 60x20 two-view strip: A has 120 valid pixels inside the shared bounding
// box (cols 20-29), B has 200, so A is feathered. Pixel (25, 2) is 5 px from
// A's boundary.
inline std::vector<pt::Raster> feather_strip() {
  return {constant_view(60, 20, 100, [](int x, int y) { return y < 12 ? x < 30 : x < 20; }),
          constant_view(60, 20, 200, [](int x, int) { return x >= 20; })};
}

inline pt::MosaicLayout feather_strip_layout() {
  pt::MosaicLayout layout{60, 20, {camera("a", 60, 20, pt::Homography::identity()), camera("b", 60, 20, pt::Homography::identity())}};
  layout.feather_px = 10;
  return layout;
}

// Three random-content views translated onto a 48x32 canvas so they overlap.
struct ViewSet {
  pt::MosaicLayout layout;
  std::vector<pt::Raster> views;
};

inline ViewSet overlapping_views(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> px(0, 255), shift(-12, 12);
  ViewSet s{{48, 32, {}}, {}};
  s.layout.feather_px = 6;
  for (int v = 0; v < 3; ++v) {
    pt::Raster src(24, 20, 1);
    for (auto& d : src.data) d = static_cast<std::uint8_t>(px(rng));
    s.layout.cameras.push_back(camera("c" + std::to_string(v), 24, 20, translation(12 + shift(rng), 6 + shift(rng) / 2)));
    s.views.push_back(pt::warp_raster(src, s.layout.cameras.back(), s.layout));
  }
  return s;
}

// Random small identity scenario with 10x10 boxes on a 12 px lattice, plus the
// per-pair overlap table counted on the pixel grid.
struct IdScenario {
  pt::RecordList gt, hyp;
  std::vector<int> gids, hids;
  std::map<std::pair<int, int>, std::int64_t> overlap;
};

inline IdScenario id_scenario(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_ids(1, 4), slot(0, 5), jitter(-3, 3), frames(3, 12);
  std::bernoulli_distribution present(0.75), follow(0.7);
  IdScenario s;
  const int ng = n_ids(rng), nh = n_ids(rng), nf = frames(rng);
  for (int i = 1; i <= ng; ++i) s.gids.push_back(i);
  for (int j = 1; j <= nh; ++j) s.hids.push_back(100 + j);
  for (int f = 0; f < nf; ++f) {
    std::vector<std::array<int, 3>> g, h;  // x, y, id
    for (int i : s.gids) {
      if (!present(rng)) continue;
      g.push_back({slot(rng) * 12, slot(rng) * 12, i});
    }
    for (int j : s.hids) {
      if (!present(rng)) continue;
      std::array<int, 3> p{slot(rng) * 12, slot(rng) * 12, j};
      if (!g.empty() && follow(rng)) {
        const auto& t = g[static_cast<std::size_t>(rng() % g.size())];
        p = {t[0] + jitter(rng), t[1] + jitter(rng), j};
      }
      h.push_back(p);
    }
    for (const auto& a : g) s.gt.push_back({f, a[2], {double(a[0]), double(a[1]), 10, 10}, 1.0});
    for (const auto& b : h) s.hyp.push_back({f, b[2], {double(b[0]), double(b[1]), 10, 10}, 1.0});
    for (const auto& a : g)
      for (const auto& b : h)
        if (oracle::grid_iou(a[0], a[1], 10, 10, b[0], b[1], 10, 10) >= 0.5) ++s.overlap[{a[2], b[2]}];
  }
  return s;
}

}  // namespace fixture
