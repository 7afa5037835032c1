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
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "planartrack/core.hpp"
#include "planartrack/io.hpp"
#include "planartrack/mask.hpp"

namespace planartrack {

/// One row of a MOT-style record file: a raw detection (id = -1), a ground
/// truth box, or a track output. Frames are 0-based in memory.
struct DetectionRecord {
  int frame = 0;
  int id = -1;
  Box bbox;
  double confidence = 1.0;
  std::optional<std::string> camera_id;
  std::optional<SpanMask> mask;

  Point2 centroid() const { return mask && !mask->empty() ? planartrack::centroid(*mask) : bbox.center(); }
  Region region() const {
    if (mask && !mask->empty()) return *mask;
    return bbox;
  }
};

using RecordList = std::vector<DetectionRecord>;

namespace csv {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double to_double(std::string_view s, std::size_t line_no) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

inline int to_int(std::string_view s, std::size_t line_no) {
  const double v = to_double(s, line_no);
  if (v != std::floor(v) || std::abs(v) > 2e9) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": expected integer, got '" + std::string(trim(s)) + "'");
  }
  return static_cast<int>(v);
}

}  // namespace csv

/// Parses `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z[,camera_id]`.
/// Blank lines and lines starting with '#' are skipped.
inline RecordList parse_records(std::string_view text) {
  RecordList out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = csv::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto f = csv::split(line);
    if (f.size() != 10 && f.size() != 11) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 10 or 11 fields, got " +
                                             std::to_string(f.size()));
    }
    DetectionRecord r;
    const int frame = csv::to_int(f[0], line_no);
    if (frame < 1) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": frames are 1-based");
    r.frame = frame - 1;
    r.id = csv::to_int(f[1], line_no);
    r.bbox = {csv::to_double(f[2], line_no), csv::to_double(f[3], line_no), csv::to_double(f[4], line_no),
              csv::to_double(f[5], line_no)};
    if (!(r.bbox.width > 0.0) || !(r.bbox.height > 0.0)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": box width and height must be positive");
    }
    r.confidence = csv::to_double(f[6], line_no);
    if (f.size() == 11) r.camera_id = std::string(csv::trim(f[10]));
    out.push_back(std::move(r));
    if (end == text.size()) break;
  }
  return out;
}

inline RecordList read_detections(const std::string& path) { return parse_records(io::read_file(path)); }

inline std::string format_record(const DetectionRecord& r) {
  std::string s = std::to_string(r.frame + 1) + ',' + std::to_string(r.id) + ',' + io::fixed6(r.bbox.left) + ',' +
                  io::fixed6(r.bbox.top) + ',' + io::fixed6(r.bbox.width) + ',' + io::fixed6(r.bbox.height) + ',' +
                  io::fixed6(r.confidence) + ",-1,-1,-1";
  if (r.camera_id) s += ',' + *r.camera_id;
  s += '\n';
  return s;
}

inline std::string format_records(std::span<const DetectionRecord> records) {
  std::string out;
  for (const auto& r : records) out += format_record(r);
  return out;
}

/// Canonical writer; used for detections, ground truth and tracks alike.
inline void write_tracks(const std::string& path, std::span<const DetectionRecord> records) {
  io::atomic_write(path, format_records(records));
}

// ---------------------------------------------------------------------------
// Mask sidecar: [{ "frame": 1-based, "det_index": i, "size": [h, w], "counts": [...] }]

inline nlohmann::json masks_to_json(std::span<const DetectionRecord> records) {
  nlohmann::json arr = nlohmann::json::array();
  std::map<int, int> per_frame;
  for (const auto& r : records) {
    const int idx = per_frame[r.frame]++;
    if (!r.mask) continue;
    const MaskRLE rle = to_rle(*r.mask);
    arr.push_back({{"frame", r.frame + 1}, {"det_index", idx}, {"size", {rle.height, rle.width}}, {"counts", rle.runs}});
  }
  return arr;
}

/// Attaches sidecar masks to records; det_index counts records of that frame in file order.
inline void attach_masks(RecordList& records, const nlohmann::json& sidecar) {
  if (!sidecar.is_array()) throw Error(ErrorCode::ParseError, "mask sidecar must be a JSON array");
  std::map<std::pair<int, int>, std::size_t> where;
  std::map<int, int> per_frame;
  for (std::size_t i = 0; i < records.size(); ++i) {
    where[{records[i].frame, per_frame[records[i].frame]++}] = i;
  }
  for (std::size_t k = 0; k < sidecar.size(); ++k) {
    const auto& e = sidecar[k];
    try {
      const int frame = e.at("frame").get<int>() - 1;
      const int idx = e.at("det_index").get<int>();
      const auto size = e.at("size").get<std::vector<int>>();
      if (size.size() != 2) throw Error(ErrorCode::ParseError, "size must be [h, w]");
      MaskRLE rle{size[1], size[0], e.at("counts").get<std::vector<std::uint32_t>>()};
      auto it = where.find({frame, idx});
      if (it == where.end()) {
        throw Error(ErrorCode::ParseError, "mask entry " + std::to_string(k) + " refers to a missing detection");
      }
      records[it->second].mask = to_spans(rle);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, "mask entry " + std::to_string(k) + ": " + ex.what());
    }
  }
}

/// Groups records by frame, preserving file order inside each frame.
inline std::map<int, RecordList> by_frame(std::span<const DetectionRecord> records) {
  std::map<int, RecordList> out;
  for (const auto& r : records) out[r.frame].push_back(r);
  return out;
}

/// Confidence filter followed by greedy, class-agnostic NMS on one frame.
/// Equal confidences keep file order.
inline RecordList filter_and_nms(std::span<const DetectionRecord> dets, double conf_min = 0.25, double nms_iou = 0.7) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].confidence >= conf_min) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  std::vector<bool> removed(dets.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (removed[i]) continue;
    kept.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!removed[j] && box_iou(dets[i].bbox, dets[j].bbox) > nms_iou) removed[j] = true;
    }
  }
  RecordList out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(dets[i]);
  return out;
}

struct SequenceManifest {
  std::string name;
  int frame_count = 1;
  double fps_source = 30.0;
  double fps_target = 30.0;
  std::optional<int> object_count_hint;
};

inline void to_json(nlohmann::json& j, const SequenceManifest& m) {
  j = {{"name", m.name}, {"frame_count", m.frame_count}, {"fps_source", m.fps_source}, {"fps_target", m.fps_target}};
  if (m.object_count_hint) j["object_count_hint"] = *m.object_count_hint;
}

inline void from_json(const nlohmann::json& j, SequenceManifest& m) {
  m.name = j.value("name", std::string{});
  m.frame_count = j.at("frame_count").get<int>();
  m.fps_source = j.at("fps_source").get<double>();
  m.fps_target = j.at("fps_target").get<double>();
  if (j.contains("object_count_hint")) m.object_count_hint = j.at("object_count_hint").get<int>();
}

/// Source frame indices kept by temporal downsampling: i is kept when
/// floor(i * fps_target / fps_source) increments (frame 0 always kept).
inline std::vector<int> select_frames(const SequenceManifest& m) {
  if (m.frame_count < 1 || !(m.fps_source > 0.0) || !(m.fps_target > 0.0) || m.fps_target > m.fps_source) {
    throw Error(ErrorCode::InvalidArgument, "need frame_count >= 1 and 0 < fps_target <= fps_source");
  }
  const double ratio = m.fps_target / m.fps_source;
  std::vector<int> out;
  long long prev = -1;
  for (int i = 0; i < m.frame_count; ++i) {
    const long long bucket = static_cast<long long>(std::floor(i * ratio + 1e-9));
    if (bucket != prev) {
      out.push_back(i);
      prev = bucket;
    }
  }
  return out;
}

}  // namespace planartrack
