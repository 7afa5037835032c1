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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <variant>
#include <vector>

#include "planartrack/core.hpp"

namespace planartrack {

/// Row-major binary grid, one byte per cell (0 or 1).
struct BinaryGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  BinaryGrid() = default;
  BinaryGrid(int w, int h) : width(w), height(h), cells(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int col, int row) const { return cells[static_cast<std::size_t>(row) * width + col]; }
  void set(int col, int row, bool v = true) {
    cells[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0;
  }
  friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;
};

/// Column-major run lengths starting with a (possibly empty) run of zeros.
struct MaskRLE {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> runs;

  friend bool operator==(const MaskRLE&, const MaskRLE&) = default;
};

inline MaskRLE encode_rle(const BinaryGrid& g) {
  if (g.width <= 0 || g.height <= 0) throw Error(ErrorCode::InvalidArgument, "empty grid");
  MaskRLE m{g.width, g.height, {}};
  std::uint8_t current = 0;
  std::uint32_t count = 0;
  for (int c = 0; c < g.width; ++c) {
    for (int r = 0; r < g.height; ++r) {
      const std::uint8_t v = g.at(c, r) ? 1 : 0;
      if (v != current) {
        m.runs.push_back(count);
        count = 0;
        current = v;
      }
      ++count;
    }
  }
  m.runs.push_back(count);
  return m;
}

inline void validate(const MaskRLE& m) {
  const std::uint64_t total = std::accumulate(m.runs.begin(), m.runs.end(), std::uint64_t{0});
  if (m.width <= 0 || m.height <= 0 || total != static_cast<std::uint64_t>(m.width) * m.height) {
    throw Error(ErrorCode::RunSumMismatch, "run lengths sum to " + std::to_string(total) +
                                               ", expected " + std::to_string(static_cast<std::uint64_t>(m.width) * m.height));
  }
}

inline BinaryGrid decode_rle(const MaskRLE& m) {
  validate(m);
  BinaryGrid g(m.width, m.height);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < m.runs.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = pos; k < pos + m.runs[i]; ++k) {
        g.set(static_cast<int>(k / m.height), static_cast<int>(k % m.height));
      }
    }
    pos += m.runs[i];
  }
  return g;
}

/// Vertical run of set cells [row_begin, row_end) in one column.
struct ColumnSpan {
  int col = 0;
  int row_begin = 0;
  int row_end = 0;
  friend bool operator==(const ColumnSpan&, const ColumnSpan&) = default;
};

/// Sparse mask: spans sorted by (col, row_begin), non-overlapping. This is the
/// working form for IoU and translation; MaskRLE is the storage form.
struct SpanMask {
  int width = 0;
  int height = 0;
  std::vector<ColumnSpan> spans;

  std::int64_t area() const {
    std::int64_t a = 0;
    for (const auto& s : spans) a += s.row_end - s.row_begin;
    return a;
  }
  bool empty() const { return spans.empty(); }
};

inline SpanMask to_spans(const MaskRLE& m) {
  validate(m);
  SpanMask out{m.width, m.height, {}};
  std::uint64_t pos = 0;
  const auto h = static_cast<std::uint64_t>(m.height);
  for (std::size_t i = 0; i < m.runs.size(); ++i) {
    std::uint64_t begin = pos, end = pos + m.runs[i];
    pos = end;
    if (i % 2 == 0) continue;
    while (begin < end) {
      const std::uint64_t col = begin / h;
      const std::uint64_t col_end = std::min(end, (col + 1) * h);
      out.spans.push_back({static_cast<int>(col), static_cast<int>(begin - col * h),
                           static_cast<int>(col_end - col * h)});
      begin = col_end;
    }
  }
  return out;
}

inline MaskRLE to_rle(const SpanMask& s) {
  MaskRLE m{s.width, s.height, {}};
  std::uint64_t pos = 0;
  const auto h = static_cast<std::uint64_t>(s.height);
  bool in_ones = false;
  std::uint64_t run_start = 0;
  for (const auto& span : s.spans) {
    const std::uint64_t b = span.col * h + span.row_begin;
    const std::uint64_t e = span.col * h + span.row_end;
    if (in_ones && b == pos) {
      pos = e;  // contiguous across a column boundary
      continue;
    }
    if (in_ones) {
      m.runs.push_back(static_cast<std::uint32_t>(pos - run_start));
      run_start = pos;
    }
    m.runs.push_back(static_cast<std::uint32_t>(b - run_start));
    run_start = b;
    pos = e;
    in_ones = true;
  }
  const std::uint64_t total = static_cast<std::uint64_t>(s.width) * h;
  if (in_ones) {
    m.runs.push_back(static_cast<std::uint32_t>(pos - run_start));
    m.runs.push_back(static_cast<std::uint32_t>(total - pos));
  } else {
    m.runs.push_back(static_cast<std::uint32_t>(total));
  }
  if (m.runs.size() > 1 && m.runs.back() == 0) m.runs.pop_back();
  return m;
}

/// Integer translation; cells pushed outside the frame are dropped.
inline SpanMask translate(const SpanMask& m, int dx, int dy) {
  SpanMask out{m.width, m.height, {}};
  out.spans.reserve(m.spans.size());
  for (const auto& s : m.spans) {
    const int col = s.col + dx;
    if (col < 0 || col >= m.width) continue;
    const int b = std::max(0, s.row_begin + dy);
    const int e = std::min(m.height, s.row_end + dy);
    if (b < e) out.spans.push_back({col, b, e});
  }
  return out;
}

/// Cells whose centers fall inside the box, clipped to the frame.
inline SpanMask rasterize(const Box& b, int width, int height) {
  SpanMask out{width, height, {}};
  const int c0 = std::max(0, static_cast<int>(std::ceil(b.left - 0.5)));
  const int c1 = std::min(width - 1, static_cast<int>(std::floor(b.right() - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(b.top - 0.5)));
  const int r1 = std::min(height - 1, static_cast<int>(std::floor(b.bottom() - 0.5)));
  if (c0 > c1 || r0 > r1) return out;
  out.spans.reserve(static_cast<std::size_t>(c1 - c0 + 1));
  for (int c = c0; c <= c1; ++c) out.spans.push_back({c, r0, r1 + 1});
  return out;
}

inline Point2 centroid(const SpanMask& m) {
  double sx = 0.0, sy = 0.0, n = 0.0;
  for (const auto& s : m.spans) {
    const double len = s.row_end - s.row_begin;
    sx += len * (s.col + 0.5);
    sy += len * 0.5 * (s.row_begin + s.row_end);
    n += len;
  }
  if (n == 0.0) throw Error(ErrorCode::EmptyMask, "centroid of an empty mask");
  return {sx / n, sy / n};
}

inline std::int64_t intersection_area(const SpanMask& a, const SpanMask& b) {
  std::int64_t inter = 0;
  std::size_t i = 0, j = 0;
  while (i < a.spans.size() && j < b.spans.size()) {
    const auto& sa = a.spans[i];
    const auto& sb = b.spans[j];
    if (sa.col != sb.col) {
      (sa.col < sb.col ? i : j)++;
      continue;
    }
    const int lo = std::max(sa.row_begin, sb.row_begin);
    const int hi = std::min(sa.row_end, sb.row_end);
    if (hi > lo) inter += hi - lo;
    (sa.row_end < sb.row_end ? i : j)++;
  }
  return inter;
}

inline double mask_iou(const SpanMask& a, const SpanMask& b) {
  const std::int64_t aa = a.area(), ab = b.area();
  if (aa == 0 || ab == 0) throw Error(ErrorCode::EmptyRegion, "mask IoU of an empty mask");
  const std::int64_t inter = intersection_area(a, b);
  return static_cast<double>(inter) / static_cast<double>(aa + ab - inter);
}

/// Tightest box around the set cells, in whole pixels.
inline Box mask_to_bbox(const SpanMask& m) {
  if (m.empty()) throw Error(ErrorCode::EmptyMask, "mask has no set pixel");
  int c0 = m.spans.front().col, c1 = m.spans.back().col;
  int r0 = m.height, r1 = 0;
  for (const auto& s : m.spans) {
    r0 = std::min(r0, s.row_begin);
    r1 = std::max(r1, s.row_end);
  }
  return {static_cast<double>(c0), static_cast<double>(r0), static_cast<double>(c1 - c0 + 1),
          static_cast<double>(r1 - r0)};
}

inline Box mask_to_bbox(const MaskRLE& m) { return mask_to_bbox(to_spans(m)); }

/// A box or a mask in a shared coordinate frame.
using Region = std::variant<Box, SpanMask>;

/// IoU of two regions. Box/box is computed in continuous coordinates; any pair
/// involving a mask rasterizes the box onto the mask's grid.
inline double region_iou(const Region& a, const Region& b) {
  if (const auto* ba = std::get_if<Box>(&a)) {
    if (const auto* bb = std::get_if<Box>(&b)) return box_iou(*ba, *bb);
    const auto& mb = std::get<SpanMask>(b);
    return mask_iou(rasterize(*ba, mb.width, mb.height), mb);
  }
  const auto& ma = std::get<SpanMask>(a);
  if (const auto* bb = std::get_if<Box>(&b)) return mask_iou(ma, rasterize(*bb, ma.width, ma.height));
  return mask_iou(ma, std::get<SpanMask>(b));
}

}  // namespace planartrack
