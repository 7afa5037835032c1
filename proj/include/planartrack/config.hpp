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

#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "planartrack/core.hpp"
#include "planartrack/geometry.hpp"
#include "planartrack/ingest.hpp"
#include "planartrack/mosaic.hpp"
#include "planartrack/simulator.hpp"
#include "planartrack/tracker.hpp"

namespace planartrack {

using json = nlohmann::json;

namespace config {

inline std::string type_name(const json& j) { return j.type_name(); }

inline bool compatible(const json& def, const json& val) {
  if (def.is_null()) return true;
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_number_integer()) {
    if (val.is_number_integer()) return true;
    return val.is_number_float() && val.get<double>() == std::floor(val.get<double>());
  }
  if (def.is_number()) return val.is_number();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return false;
}

/// Overlays `layer` onto `base`. Keys absent from `base` are rejected, as are
/// values whose JSON type differs from the default's. `path` is a JSON pointer.
inline void merge_strict(json& base, const json& layer, const std::string& path = "") {
  if (!layer.is_object()) throw Error(ErrorCode::TypeMismatch, (path.empty() ? "/" : path) + ": expected an object");
  for (auto it = layer.begin(); it != layer.end(); ++it) {
    const std::string p = path + "/" + it.key();
    if (!base.contains(it.key())) throw Error(ErrorCode::UnknownKey, "unknown key '" + it.key() + "' at " + p);
    json& slot = base[it.key()];
    if (!compatible(slot, it.value())) {
      throw Error(ErrorCode::TypeMismatch, p + ": expected " + type_name(slot) + ", got " + type_name(it.value()));
    }
    if (slot.is_object() && !slot.empty()) {
      merge_strict(slot, it.value(), p);
    } else if (slot.is_number_integer() && it.value().is_number_float()) {
      slot = static_cast<std::int64_t>(it.value().get<double>());
    } else {
      slot = it.value();
    }
  }
}

/// Parses `a.b.c=value` overrides; the value is read as JSON when possible and
/// as a plain string otherwise.
inline json overrides_to_json(const std::vector<std::string>& overrides) {
  json out = json::object();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::InvalidArgument, "override '" + o + "' is not key=value");
    }
    const std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &out;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  return out;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

/// Throws UnknownKey for any member of `j` not in `allowed`.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::TypeMismatch, path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error(ErrorCode::UnknownKey, "unknown key '" + it.key() + "' at " + path + "/" + it.key());
  }
}

/// Converts a JSON library exception into a TypeMismatch tagged with `path`.
template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::TypeMismatch, path + ": " + e.what());
  }
}

}  // namespace config

// ---------------------------------------------------------------------------
// Serialization of domain types

inline json point_to_json(Point2 p) { return json::array({p.x, p.y}); }
inline Point2 point_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorCode::TypeMismatch, "point must be [x, y]");
  return {v[0], v[1]};
}

inline json homography_to_json(const Homography& h) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({h(r, 0), h(r, 1), h(r, 2)});
  return rows;
}

inline Homography homography_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.size() != 3) throw Error(ErrorCode::TypeMismatch, "H must be a 3x3 array");
  std::array<std::array<double, 3>, 3> m{};
  for (int r = 0; r < 3; ++r) {
    if (rows[r].size() != 3) throw Error(ErrorCode::TypeMismatch, "H must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m[r][c] = rows[r][c];
  }
  return Homography::from_rows(m);
}

inline json distortion_to_json(const DistortionModel& d) {
  return {{"k1", d.k1}, {"k2", d.k2}, {"center", point_to_json(d.center)}, {"scale", d.scale}};
}

inline DistortionModel distortion_from_json(const json& j, const std::string& path = "/distortion") {
  config::check_keys(j, {"k1", "k2", "center", "scale", "residual_before", "residual_after"}, path);
  return config::guarded(path, [&] {
    DistortionModel d;
    d.k1 = j.value("k1", 0.0);
    d.k2 = j.value("k2", 0.0);
    if (j.contains("center")) d.center = point_from_json(j.at("center"));
    d.scale = j.value("scale", 1.0);
    if (!(d.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, path + "/scale must be positive");
    return d;
  });
}

inline json camera_to_json(const CameraConfig& c) {
  return {{"camera_id", c.camera_id},
          {"crop", {c.crop.x, c.crop.y, c.crop.width, c.crop.height}},
          {"distortion", distortion_to_json(c.distortion)},
          {"H", homography_to_json(c.homography)}};
}

inline CameraConfig camera_from_json(const json& j, const std::string& path) {
  config::check_keys(j, {"camera_id", "crop", "distortion", "H"}, path);
  return config::guarded(path, [&] {
    CameraConfig c;
    c.camera_id = j.at("camera_id").get<std::string>();
    const auto crop = j.at("crop").get<std::vector<int>>();
    if (crop.size() != 4) throw Error(ErrorCode::TypeMismatch, path + "/crop must be [x, y, w, h]");
    c.crop = {crop[0], crop[1], crop[2], crop[3]};
    if (j.contains("distortion")) c.distortion = distortion_from_json(j.at("distortion"), path + "/distortion");
    c.homography = homography_from_json(j.at("H"));
    return c;
  });
}

inline json layout_to_json(const MosaicLayout& l) {
  json cams = json::array();
  for (const auto& c : l.cameras) cams.push_back(camera_to_json(c));
  return {{"canvas", {l.canvas_width, l.canvas_height}}, {"feather_px", l.feather_px}, {"cameras", cams}};
}

inline MosaicLayout layout_from_json(const json& j, const std::string& path = "") {
  config::check_keys(j, {"canvas", "feather_px", "cameras"}, path);
  MosaicLayout l;
  config::guarded(path, [&] {
    if (j.contains("canvas")) {
      const auto c = j.at("canvas").get<std::vector<int>>();
      if (c.size() != 2) throw Error(ErrorCode::TypeMismatch, path + "/canvas must be [w, h]");
      l.canvas_width = c[0];
      l.canvas_height = c[1];
    }
    l.feather_px = j.value("feather_px", 10);
    if (j.contains("cameras")) {
      const auto& cams = j.at("cameras");
      for (std::size_t i = 0; i < cams.size(); ++i) {
        l.cameras.push_back(camera_from_json(cams[i], path + "/cameras/" + std::to_string(i)));
      }
    }
    return 0;
  });
  l.validate();
  return l;
}

inline json tracker_config_to_json(const TrackerConfig& c) {
  return {{"cutoff_cost", c.cutoff_cost},
          {"max_gap", c.max_gap},
          {"min_hits", c.min_hits},
          {"closed_world", c.closed_world},
          {"process_noise", c.process_noise},
          {"measurement_noise", c.measurement_noise},
          {"initial_velocity_variance", c.initial_velocity_variance},
          {"population", c.population},
          {"emit_coasting", c.emit_coasting}};
}

inline TrackerConfig tracker_config_from_json(const json& j) {
  TrackerConfig c;
  c.cutoff_cost = j.at("cutoff_cost").get<double>();
  c.max_gap = j.at("max_gap").get<int>();
  c.min_hits = j.at("min_hits").get<int>();
  c.closed_world = j.at("closed_world").get<bool>();
  c.process_noise = j.at("process_noise").get<double>();
  c.measurement_noise = j.at("measurement_noise").get<double>();
  c.initial_velocity_variance = j.at("initial_velocity_variance").get<double>();
  c.population = j.at("population").get<int>();
  c.emit_coasting = j.at("emit_coasting").get<bool>();
  c.validate();
  return c;
}

/// Configuration of the `track` subcommand: tracker parameters plus the
/// detector post-processing applied to every frame before association.
struct TrackRunConfig {
  TrackerConfig tracker;
  double conf_min = 0.25;
  double nms_iou = 0.7;
};

inline json track_run_defaults() {
  json j = tracker_config_to_json(TrackerConfig{});
  j["conf_min"] = 0.25;
  j["nms_iou"] = 0.7;
  return j;
}

inline TrackRunConfig track_run_from_json(const json& j) {
  TrackRunConfig c;
  c.tracker = tracker_config_from_json(j);
  c.conf_min = j.at("conf_min").get<double>();
  c.nms_iou = j.at("nms_iou").get<double>();
  return c;
}

/// Defaults first, then the file (may be empty), then CLI overrides.
inline json layered_config(json defaults, const std::string& file_text, const std::vector<std::string>& overrides,
                           const std::string& what) {
  if (!file_text.empty() && file_text.find_first_not_of(" \t\r\n") != std::string::npos) {
    config::merge_strict(defaults, config::parse_json_text(file_text, what));
  }
  if (!overrides.empty()) config::merge_strict(defaults, config::overrides_to_json(overrides));
  return defaults;
}

inline TrackRunConfig load_track_config(const std::string& file_text, const std::vector<std::string>& overrides = {}) {
  return track_run_from_json(layered_config(track_run_defaults(), file_text, overrides, "tracker config"));
}

// Scenario ------------------------------------------------------------------

inline json scenario_to_json(const sim::ScenarioConfig& s) {
  return {{"name", s.name},
          {"seed", s.seed},
          {"n_objects", s.n_objects},
          {"pen", {s.pen.left, s.pen.top, s.pen.width, s.pen.height}},
          {"n_frames", s.n_frames},
          {"cameras", layout_to_json(s.cameras)},
          {"motion",
           {{"max_speed", s.motion.max_speed},
            {"waypoint_pause_prob", s.motion.waypoint_pause_prob},
            {"smoothness", s.motion.smoothness},
            {"max_turn_rate", s.motion.max_turn_rate},
            {"pause_min_frames", s.motion.pause_min_frames},
            {"pause_max_frames", s.motion.pause_max_frames}}},
          {"footprint", {s.footprint.length, s.footprint.width}},
          {"noise",
           {{"centroid_sigma", s.noise.centroid_sigma},
            {"size_sigma_frac", s.noise.size_sigma_frac},
            {"miss_prob", s.noise.miss_prob},
            {"clutter_rate", s.noise.clutter_rate},
            {"occlusion_merge_iou", s.noise.occlusion_merge_iou}}},
          {"emit_masks", s.emit_masks}};
}

inline sim::ScenarioConfig scenario_from_json(const json& j) {
  return config::guarded("scenario", [&] {
    sim::ScenarioConfig s;
    s.name = j.at("name").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.n_objects = j.at("n_objects").get<int>();
    const auto pen = j.at("pen").get<std::vector<double>>();
    if (pen.size() != 4) throw Error(ErrorCode::TypeMismatch, "/pen must be [x, y, w, h]");
    s.pen = {pen[0], pen[1], pen[2], pen[3]};
    s.n_frames = j.at("n_frames").get<int>();
    s.cameras = layout_from_json(j.at("cameras"), "/cameras");
    const auto& m = j.at("motion");
    s.motion = {m.at("max_speed").get<double>(), m.at("waypoint_pause_prob").get<double>(),
                m.at("smoothness").get<double>(),  m.at("max_turn_rate").get<double>(),
                m.at("pause_min_frames").get<int>(),
                m.at("pause_max_frames").get<int>()};
    const auto fp = j.at("footprint").get<std::vector<double>>();
    if (fp.size() != 2) throw Error(ErrorCode::TypeMismatch, "/footprint must be [length, width]");
    s.footprint = {fp[0], fp[1]};
    const auto& n = j.at("noise");
    s.noise = {n.at("centroid_sigma").get<double>(), n.at("size_sigma_frac").get<double>(),
               n.at("miss_prob").get<double>(), n.at("clutter_rate").get<double>(),
               n.at("occlusion_merge_iou").get<double>()};
    s.emit_masks = j.at("emit_masks").get<bool>();
    s.validate();
    return s;
  });
}

inline sim::ScenarioConfig default_scenario() {
  sim::ScenarioConfig s;
  s.cameras = sim::default_layout();
  return s;
}

inline sim::ScenarioConfig load_scenario(const std::string& file_text, const std::vector<std::string>& overrides = {}) {
  return scenario_from_json(layered_config(scenario_to_json(default_scenario()), file_text, overrides, "scenario"));
}

}  // namespace planartrack
