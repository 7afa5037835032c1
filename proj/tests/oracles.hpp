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

// Independent reference implementations used to check the library. They are
// deliberately naive: brute force, exhaustive enumeration, direct formulas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

/// IoU of two integer-aligned boxes by counting unit cells on a grid.
inline double grid_iou(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
  const int x0 = std::min(ax, bx), y0 = std::min(ay, by);
  const int x1 = std::max(ax + aw, bx + bw), y1 = std::max(ay + ah, by + bh);
  std::int64_t inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool in_a = x >= ax && x < ax + aw && y >= ay && y < ay + ah;
      const bool in_b = x >= bx && x < bx + bw && y >= by && y < by + bh;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Minimum total cost of a matching that pairs every row (or every column,
/// whichever side is smaller). Enumerates every permutation of the larger side.
inline double brute_force_min_cost(const std::vector<std::vector<double>>& c) {
  const std::size_t rows = c.size(), cols = rows ? c[0].size() : 0;
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
      if (perm[r] < cols) total += c[r][perm[r]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Minimum of the cutoff-padded objective: matched pairs pay their cost, every
/// row or column left without a usable partner pays the cutoff.
inline double brute_force_padded(const std::vector<std::vector<double>>& c, double cutoff) {
  const std::size_t rows = c.size(), cols = rows ? c[0].size() : 0;
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t q = perm[r];
      if (r < rows && q < cols) total += std::min(c[r][q], cutoff);
      else total += cutoff;
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Best IDTP over every injective partial mapping gt -> hyp.
inline std::int64_t exhaustive_idtp(const std::vector<int>& gids, const std::vector<int>& hids,
                                    const std::map<std::pair<int, int>, std::int64_t>& overlap) {
  std::int64_t best = 0;
  std::set<int> used;
  auto rec = [&](auto&& self, std::size_t i, std::int64_t acc) -> void {
    if (i == gids.size()) {
      best = std::max(best, acc);
      return;
    }
    self(self, i + 1, acc);  // gt id left unmapped
    for (int h : hids) {
      if (used.count(h)) continue;
      used.insert(h);
      const auto it = overlap.find({gids[i], h});
      self(self, i + 1, acc + (it == overlap.end() ? 0 : it->second));
      used.erase(h);
    }
  };
  rec(rec, 0, 0);
  return best;
}

/// Sum of squared perpendicular distances to the best line, found by scanning
/// the line normal angle on a fine grid and refining around the minimum. For a
/// fixed normal the optimal offset is the mean projection.
inline double line_search_residual(const std::vector<std::pair<double, double>>& pts) {
  auto cost = [&](double theta) {
    const double nx = std::cos(theta), ny = std::sin(theta);
    double mean = 0.0;
    for (auto [x, y] : pts) mean += nx * x + ny * y;
    mean /= static_cast<double>(pts.size());
    double s = 0.0;
    for (auto [x, y] : pts) {
      const double d = nx * x + ny * y - mean;
      s += d * d;
    }
    return s;
  };
  const double pi = std::acos(-1.0);
  double lo = 0.0, hi = pi, best_t = 0.0;
  for (int level = 0; level < 6; ++level) {
    const int steps = 2000;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      const double t = lo + (hi - lo) * i / steps;
      const double v = cost(t);
      if (v < best) best = v, best_t = t;
    }
    const double w = (hi - lo) / steps;
    lo = best_t - 2 * w;
    hi = best_t + 2 * w;
  }
  return cost(best_t);
}

/// Bilinear sample of a single-channel image stored row-major, with
/// pixel centers at integer + 0.5; returns NaN outside the sampling domain.
inline double bilinear(const std::vector<double>& img, int w, int h, double x, double y) {
  const double fx = x - 0.5, fy = y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0, ay = fy - y0;
  auto px = [&](int c, int r) {
    c = std::clamp(c, 0, w - 1);
    r = std::clamp(r, 0, h - 1);
    return img[static_cast<std::size_t>(r) * w + c];
  };
  return (1 - ax) * (1 - ay) * px(x0, y0) + ax * (1 - ay) * px(x0 + 1, y0) + (1 - ax) * ay * px(x0, y0 + 1) +
         ax * ay * px(x0 + 1, y0 + 1);
}

}  // namespace oracle
