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

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "planartrack/config.hpp"
#include "planartrack/core.hpp"
#include "planartrack/geometry.hpp"
#include "planartrack/ingest.hpp"
#include "planartrack/io.hpp"
#include "planartrack/metrics.hpp"
#include "planartrack/mosaic.hpp"
#include "planartrack/raster.hpp"
#include "planartrack/simulator.hpp"
#include "planartrack/tracker.hpp"

namespace planartrack::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class LogLevel { Error, Warn, Info, Debug };

/// Files produced by one subcommand, keyed by path relative to the output
/// directory. Nothing touches the disk until every output is computed.
class OutputSet {
 public:
  void add(const std::string& rel, std::string content) { files_[rel] = std::move(content); }
  void add_json(const std::string& rel, const json& j) { add(rel, j.dump(2) + "\n"); }
  void add_compact_json(const std::string& rel, const json& j) { add(rel, j.dump() + "\n"); }
  const std::map<std::string, std::string>& files() const { return files_; }

  void merge(const std::string& prefix, const OutputSet& other) {
    for (const auto& [k, v] : other.files_) files_[prefix + k] = v;
  }

  void commit(const std::filesystem::path& dir) const {
    for (const auto& [rel, content] : files_) io::atomic_write(dir / rel, content);
  }

 private:
  std::map<std::string, std::string> files_;
};

struct Context {
  std::filesystem::path out_dir;
  bool no_timestamp = false;
  std::vector<std::string> overrides;
  LogLevel log_level = LogLevel::Warn;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
  json inputs = json::array();

  void log(LogLevel level, const std::string& msg) const {
    if (level <= log_level) *err << msg << '\n';
  }

  std::string read_input(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::IoError, "input file not found: " + path);
    std::string text = io::read_file(path);
    inputs.push_back({{"path", path}, {"fnv1a64", io::hex64(io::fnv1a64(text))}});
    return text;
  }
};

inline unsigned thread_cap() {
  if (const char* env = std::getenv("PLANARTRACK_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline json run_record(const Context& ctx, const std::string& subcommand, const json& effective, const OutputSet& outs) {
  json files = json::array();
  for (const auto& [rel, _] : outs.files()) files.push_back(rel);
  json r = {{"tool", "planartrack"},
            {"version", kVersion},
            {"subcommand", subcommand},
            {"effective_config", effective},
            {"inputs", ctx.inputs},
            {"outputs", files}};
  if (!ctx.no_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    r["timestamp"] = buf;
  }
  return r;
}

inline void finish(Context& ctx, const std::string& subcommand, const json& effective, OutputSet outs) {
  outs.add_json("run.json", run_record(ctx, subcommand, effective, outs));
  outs.commit(ctx.out_dir);
  ctx.log(LogLevel::Info, subcommand + ": wrote " + std::to_string(outs.files().size()) + " files to " + ctx.out_dir.string());
}

// --- calibrate ----------------------------------------------------------------

inline CorrespondenceSet parse_correspondences(const std::string& text) {
  CorrespondenceSet out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = csv::split(t);
    if (out.empty() && t.rfind("src_x", 0) == 0) continue;  // header
    if (f.size() != 4) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected src_x,src_y,dst_x,dst_y");
    }
    out.push_back({{csv::to_double(f[0], line_no), csv::to_double(f[1], line_no)},
                   {csv::to_double(f[2], line_no), csv::to_double(f[3], line_no)}});
  }
  return out;
}

struct CalibrateArgs {
  std::string pairs, camera_id = "cam", distortion;
};

inline OutputSet cmd_calibrate(Context& ctx, const CalibrateArgs& a, json& effective) {
  const auto pairs = parse_correspondences(ctx.read_input(a.pairs));
  DistortionModel d;
  if (!a.distortion.empty()) {
    d = distortion_from_json(config::parse_json_text(ctx.read_input(a.distortion), a.distortion));
  }
  const Homography h = estimate_homography(pairs);
  const double rms = reprojection_rms(h, pairs);
  OutputSet outs;
  outs.add_json("calibration.json",
                {{"camera_id", a.camera_id}, {"H", homography_to_json(h)}, {"distortion", distortion_to_json(d)}, {"rms", rms}});
  effective = {{"camera_id", a.camera_id}, {"pairs", pairs.size()}};
  *ctx.out << "rms " << rms << '\n';
  return outs;
}

// --- distortion ---------------------------------------------------------------

inline std::vector<Polyline> parse_polylines(const std::string& text, const std::string& what) {
  const json j = config::parse_json_text(text, what);
  if (!j.is_array()) throw Error(ErrorCode::ParseError, what + ": expected a JSON array of polylines");
  std::vector<Polyline> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "/" + std::to_string(i);
    config::check_keys(j[i], {"label", "points"}, path);
    config::guarded(path, [&] {
      Polyline p;
      p.label = j[i].value("label", std::string{});
      for (const auto& pt : j[i].at("points")) p.points.push_back(point_from_json(pt));
      out.push_back(std::move(p));
      return 0;
    });
  }
  return out;
}

struct DistortionArgs {
  std::string lines;
  int width = 0, height = 0;
};

inline OutputSet cmd_distortion(Context& ctx, const DistortionArgs& a, json& effective) {
  const auto lines = parse_polylines(ctx.read_input(a.lines), a.lines);
  if (a.width <= 0 || a.height <= 0) throw Error(ErrorCode::InvalidArgument, "--width and --height must be positive");
  const DistortionModel base = DistortionModel::for_image(a.width, a.height);
  const DistortionFit fit = estimate_distortion(lines, base.center, base.scale);
  json j = distortion_to_json(fit.model);
  j["residual_before"] = fit.initial_objective;
  j["residual_after"] = fit.objective;
  OutputSet outs;
  outs.add_json("distortion.json", j);
  effective = {{"width", a.width}, {"height", a.height}, {"lines", lines.size()}};
  *ctx.out << "k1 " << fit.model.k1 << " k2 " << fit.model.k2 << " residual " << fit.initial_objective << " -> "
           << fit.objective << '\n';
  return outs;
}

// --- mosaic -------------------------------------------------------------------

struct MosaicArgs {
  std::string layout, images;
};

inline OutputSet cmd_mosaic(Context& ctx, const MosaicArgs& a, json& effective) {
  json lj = config::parse_json_text(ctx.read_input(a.layout), a.layout);
  if (!ctx.overrides.empty()) config::merge_strict(lj, config::overrides_to_json(ctx.overrides));
  const MosaicLayout layout = layout_from_json(lj);
  std::vector<Raster> sources;
  for (const auto& cam : layout.cameras) {
    std::filesystem::path p = std::filesystem::path(a.images) / (cam.camera_id + ".ppm");
    if (!std::filesystem::exists(p)) p = std::filesystem::path(a.images) / (cam.camera_id + ".pgm");
    ctx.read_input(p.string());
    sources.push_back(read_pnm(p.string()));
  }
  // Cameras are independent; warp them in bounded parallel batches.
  std::vector<Raster> warped(sources.size());
  const unsigned cap = thread_cap();
  for (std::size_t begin = 0; begin < sources.size(); begin += cap) {
    std::vector<std::future<Raster>> jobs;
    for (std::size_t i = begin; i < std::min(sources.size(), begin + cap); ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] { return warp_raster(sources[i], layout.cameras[i], layout); }));
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) warped[begin + k] = jobs[k].get();
  }
  const Raster mosaic = compose_mosaic(warped, layout);
  OutputSet outs;
  outs.add(mosaic.channels == 3 ? "mosaic.ppm" : "mosaic.pgm", encode_pnm(mosaic));
  outs.add("mosaic_validity.pgm", encode_pnm(validity_image(mosaic)));
  json overlaps = json::array();
  std::vector<std::string> ids;
  for (const auto& c : layout.cameras) ids.push_back(c.camera_id);
  for (const auto& d : plan_overlaps(warped, ids)) {
    overlaps.push_back({{"views", {ids[d.first], ids[d.second]}},
                        {"valid_counts", {d.first_count, d.second_count}},
                        {"feathered", ids[d.feathered]}});
  }
  outs.add_json("overlaps.json", overlaps);
  effective = layout_to_json(layout);
  return outs;
}

// --- map-detections -----------------------------------------------------------

inline std::pair<std::string, std::string> split_assignment(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(flag) + " expects camera_id=path, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

struct MapArgs {
  std::string layout;
  std::vector<std::string> dets, masks;
  double dedupe_iou = 0.5;
};

inline OutputSet cmd_map_detections(Context& ctx, const MapArgs& a, json& effective) {
  const MosaicLayout layout = layout_from_json(config::parse_json_text(ctx.read_input(a.layout), a.layout));
  std::map<std::string, std::string> mask_paths;
  for (const auto& m : a.masks) mask_paths.insert(split_assignment(m, "--masks"));
  RecordList all;
  for (const auto& assignment : a.dets) {
    const auto [cam_id, path] = split_assignment(assignment, "--dets");
    const CameraConfig* cam = layout.find(cam_id);
    if (!cam) throw Error(ErrorCode::InvalidArgument, "camera '" + cam_id + "' is not in the layout");
    RecordList recs = parse_records(ctx.read_input(path));
    if (auto it = mask_paths.find(cam_id); it != mask_paths.end()) {
      attach_masks(recs, config::parse_json_text(ctx.read_input(it->second), it->second));
    }
    for (const auto& r : recs) all.push_back(map_detection_to_canvas(r, *cam, layout.canvas_width, layout.canvas_height));
  }
  RecordList out;
  for (const auto& [frame, dets] : by_frame(all)) {
    auto kept = dedupe_canvas_detections(dets, a.dedupe_iou);
    out.insert(out.end(), kept.begin(), kept.end());
  }
  OutputSet outs;
  outs.add("canvas_detections.csv", format_records(out));
  const json masks = masks_to_json(out);
  if (!masks.empty()) outs.add_compact_json("canvas_masks.json", masks);
  effective = {{"dedupe_iou", a.dedupe_iou}, {"layout", layout_to_json(layout)}};
  return outs;
}

// --- track --------------------------------------------------------------------

struct TrackArgs {
  std::string dets, masks, config;
  int frames = 0;
};

inline json track_summary(const TrackingRun& run, const json& effective) {
  json spans = json::array();
  for (const auto& l : run.lifespans) {
    spans.push_back({{"id", l.id},
                     {"first_frame", l.first_frame + 1},
                     {"last_frame", l.last_matched_frame + 1},
                     {"hits", l.hits},
                     {"status", to_string(l.status)}});
  }
  return {{"config", effective},
          {"frames_processed", run.frames},
          {"discarded_detections", run.discarded},
          {"output_rows", run.tracks.size()},
          {"tracks", spans}};
}

inline OutputSet track_records(const RecordList& raw, const TrackRunConfig& cfg, int frames, const json& effective) {
  RecordList filtered;
  for (const auto& [frame, dets] : by_frame(raw)) {
    auto kept = filter_and_nms(dets, cfg.conf_min, cfg.nms_iou);
    filtered.insert(filtered.end(), kept.begin(), kept.end());
  }
  std::optional<int> last;
  if (frames > 0) last = frames - 1;
  const TrackingRun run = run_tracker(filtered, cfg.tracker, last);
  OutputSet outs;
  outs.add("tracks.csv", format_records(run.tracks));
  outs.add_json("summary.json", track_summary(run, effective));
  return outs;
}

inline OutputSet cmd_track(Context& ctx, const TrackArgs& a, json& effective) {
  RecordList dets = parse_records(ctx.read_input(a.dets));
  if (!a.masks.empty()) attach_masks(dets, config::parse_json_text(ctx.read_input(a.masks), a.masks));
  const std::string cfg_text = a.config.empty() ? std::string{} : ctx.read_input(a.config);
  effective = layered_config(track_run_defaults(), cfg_text, ctx.overrides, "tracker config");
  const TrackRunConfig cfg = track_run_from_json(effective);
  return track_records(dets, cfg, a.frames, effective);
}

// --- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  std::string gt, hyp;
  double threshold = 0.5;
  bool ap101 = false;
};

inline OutputSet evaluate_records(Context& ctx, const RecordList& gt, const RecordList& hyp, const EvaluateArgs& a) {
  const auto report = metrics::evaluate(gt, hyp, a.threshold,
                                        a.ap101 ? metrics::ApInterpolation::Point101 : metrics::ApInterpolation::AllPoint);
  *ctx.out << metrics::format_table(report);
  OutputSet outs;
  json j = metrics::to_json(report);
  j["ap_interpolation"] = a.ap101 ? "101-point" : "all-point";
  outs.add_json("report.json", j);
  outs.add("frames.csv", metrics::format_frame_diagnostics(report.matching));
  return outs;
}

inline OutputSet cmd_evaluate(Context& ctx, const EvaluateArgs& a, json& effective) {
  const RecordList gt = parse_records(ctx.read_input(a.gt));
  const RecordList hyp = parse_records(ctx.read_input(a.hyp));
  effective = {{"match_threshold", a.threshold}, {"ap_interpolation", a.ap101 ? "101-point" : "all-point"}};
  return evaluate_records(ctx, gt, hyp, a);
}

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
};

inline OutputSet simulation_outputs(const sim::ScenarioConfig& cfg, const sim::SimulationResult& r) {
  OutputSet outs;
  outs.add("gt_canvas.csv", format_records(r.truth.canvas));
  outs.add("dets_canvas.csv", format_records(r.canvas_detections.detections));
  json files = {{"gt_canvas", "gt_canvas.csv"}, {"dets_canvas", "dets_canvas.csv"}};
  if (cfg.emit_masks) {
    outs.add_compact_json("gt_canvas_masks.json", masks_to_json(r.truth.canvas));
    outs.add_compact_json("dets_canvas_masks.json", masks_to_json(r.canvas_detections.detections));
    files["gt_canvas_masks"] = "gt_canvas_masks.json";
    files["dets_canvas_masks"] = "dets_canvas_masks.json";
  }
  json cams = json::object();
  for (const auto& [id, recs] : r.truth.per_camera) {
    outs.add("cameras/gt_" + id + ".csv", format_records(recs));
    cams[id]["gt"] = "cameras/gt_" + id + ".csv";
  }
  for (const auto& [id, recs] : r.camera_detections) {
    outs.add("cameras/dets_" + id + ".csv", format_records(recs));
    cams[id]["dets"] = "cameras/dets_" + id + ".csv";
  }
  files["cameras"] = cams;
  SequenceManifest m{cfg.name, cfg.n_frames, 6.0, 6.0, cfg.n_objects};
  json manifest = m;
  manifest["files"] = files;
  manifest["layout"] = "layout.json";
  manifest["stats"] = {{"gt_boxes", r.truth.canvas.size()},
                       {"detections", r.canvas_detections.detections.size()},
                       {"missed", r.canvas_detections.missed},
                       {"occluded", r.canvas_detections.occluded},
                       {"clutter", r.canvas_detections.clutter}};
  outs.add_json("manifest.json", manifest);
  outs.add_json("layout.json", layout_to_json(cfg.cameras));
  return outs;
}

inline OutputSet cmd_simulate(Context& ctx, const SimulateArgs& a, json& effective) {
  const std::string text = a.scenario.empty() ? std::string{} : ctx.read_input(a.scenario);
  const sim::ScenarioConfig cfg = load_scenario(text, ctx.overrides);
  effective = scenario_to_json(cfg);
  return simulation_outputs(cfg, sim::simulate(cfg));
}

// --- pipeline -----------------------------------------------------------------

struct PipelineArgs {
  std::string scenario, config;
  double threshold = 0.5;
};

/// simulate -> track -> evaluate, producing sim/, track/ and eval/ exactly as
/// the individual subcommands would. Overrides prefixed `tracker.` go to the
/// tracker config, all others to the scenario.
inline OutputSet cmd_pipeline(Context& ctx, const PipelineArgs& a, json& effective) {
  std::vector<std::string> scenario_overrides, tracker_overrides;
  for (const auto& o : ctx.overrides) {
    if (o.rfind("tracker.", 0) == 0) tracker_overrides.push_back(o.substr(8));
    else scenario_overrides.push_back(o);
  }
  const std::string scenario_text = a.scenario.empty() ? std::string{} : ctx.read_input(a.scenario);
  const std::string tracker_text = a.config.empty() ? std::string{} : ctx.read_input(a.config);
  const sim::ScenarioConfig scenario = load_scenario(scenario_text, scenario_overrides);
  const json tracker_json = layered_config(track_run_defaults(), tracker_text, tracker_overrides, "tracker config");
  const TrackRunConfig tracker = track_run_from_json(tracker_json);

  const sim::SimulationResult result = sim::simulate(scenario);
  OutputSet sim_out = simulation_outputs(scenario, result);
  // Later stages read the canonical text, as a separate invocation would.
  RecordList dets = parse_records(sim_out.files().at("dets_canvas.csv"));
  if (scenario.emit_masks) attach_masks(dets, json::parse(sim_out.files().at("dets_canvas_masks.json")));
  OutputSet track_out = track_records(dets, tracker, scenario.n_frames, tracker_json);
  const RecordList gt = parse_records(sim_out.files().at("gt_canvas.csv"));
  const RecordList hyp = parse_records(track_out.files().at("tracks.csv"));
  EvaluateArgs ea;
  ea.threshold = a.threshold;
  OutputSet eval_out = evaluate_records(ctx, gt, hyp, ea);

  OutputSet outs;
  outs.merge("sim/", sim_out);
  outs.merge("track/", track_out);
  outs.merge("eval/", eval_out);
  effective = {{"scenario", scenario_to_json(scenario)}, {"tracker", tracker_json}, {"match_threshold", a.threshold}};
  return outs;
}

// --- entry point --------------------------------------------------------------

inline int run(const std::vector<std::string>& argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"planartrack: multi-camera planar multi-object tracking"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  std::string out_dir;
  std::string log_level = "warn";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_flag("--no-timestamp", ctx.no_timestamp, "omit the timestamp from run.json");
    sub->add_option("--set", ctx.overrides, "override a config field, key=value (repeatable)");
    sub->add_option("--log-level", log_level, "error|warn|info|debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  };

  CalibrateArgs cal;
  auto* s_cal = app.add_subcommand("calibrate", "estimate a camera homography from correspondences");
  s_cal->add_option("--pairs", cal.pairs, "CSV of src_x,src_y,dst_x,dst_y")->required();
  s_cal->add_option("--camera-id", cal.camera_id, "camera identifier");
  s_cal->add_option("--distortion", cal.distortion, "distortion JSON to embed");
  common(s_cal);

  DistortionArgs dis;
  auto* s_dis = app.add_subcommand("distortion", "fit radial distortion from straight structural lines");
  s_dis->add_option("--lines", dis.lines, "JSON array of polylines")->required();
  s_dis->add_option("--width", dis.width, "image width in pixels")->required();
  s_dis->add_option("--height", dis.height, "image height in pixels")->required();
  common(s_dis);

  MosaicArgs mos;
  auto* s_mos = app.add_subcommand("mosaic", "warp camera frames and compose the panoramic canvas");
  s_mos->add_option("--layout", mos.layout, "layout JSON")->required();
  s_mos->add_option("--images", mos.images, "directory with <camera_id>.ppm|pgm")->required();
  common(s_mos);

  MapArgs map;
  auto* s_map = app.add_subcommand("map-detections", "map per-camera detections onto the canvas");
  s_map->add_option("--layout", map.layout, "layout JSON")->required();
  s_map->add_option("--dets", map.dets, "camera_id=detections.csv (repeatable)")->required();
  s_map->add_option("--masks", map.masks, "camera_id=masks.json (repeatable)");
  s_map->add_option("--dedupe-iou", map.dedupe_iou, "cross-camera duplicate IoU threshold");
  common(s_map);

  TrackArgs trk;
  auto* s_trk = app.add_subcommand("track", "track canvas detections");
  s_trk->add_option("--dets", trk.dets, "canvas detection CSV")->required();
  s_trk->add_option("--masks", trk.masks, "mask sidecar JSON");
  s_trk->add_option("--config", trk.config, "tracker config JSON");
  s_trk->add_option("--frames", trk.frames, "sequence length; trailing empty frames still coast");
  common(s_trk);

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "score tracks against ground truth");
  s_ev->add_option("--gt", ev.gt, "ground-truth CSV")->required();
  s_ev->add_option("--hyp", ev.hyp, "hypothesis CSV")->required();
  s_ev->add_option("--threshold", ev.threshold, "IoU match threshold");
  s_ev->add_flag("--ap-101", ev.ap101, "101-point AP interpolation");
  common(s_ev);

  SimulateArgs simd;
  auto* s_sim = app.add_subcommand("simulate", "generate a synthetic scenario");
  s_sim->add_option("--scenario", simd.scenario, "scenario JSON (defaults when omitted)");
  common(s_sim);

  PipelineArgs pipe;
  auto* s_pipe = app.add_subcommand("pipeline", "simulate, track and evaluate in one run");
  s_pipe->add_option("--scenario", pipe.scenario, "scenario JSON");
  s_pipe->add_option("--config", pipe.config, "tracker config JSON");
  s_pipe->add_option("--threshold", pipe.threshold, "IoU match threshold");
  common(s_pipe);

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  ctx.out_dir = out_dir;
  ctx.log_level = log_level == "error" ? LogLevel::Error
                  : log_level == "info" ? LogLevel::Info
                  : log_level == "debug" ? LogLevel::Debug
                                         : LogLevel::Warn;
  try {
    json effective;
    std::string name;
    OutputSet outs;
    if (*s_cal) name = "calibrate", outs = cmd_calibrate(ctx, cal, effective);
    else if (*s_dis) name = "distortion", outs = cmd_distortion(ctx, dis, effective);
    else if (*s_mos) name = "mosaic", outs = cmd_mosaic(ctx, mos, effective);
    else if (*s_map) name = "map-detections", outs = cmd_map_detections(ctx, map, effective);
    else if (*s_trk) name = "track", outs = cmd_track(ctx, trk, effective);
    else if (*s_ev) name = "evaluate", outs = cmd_evaluate(ctx, ev, effective);
    else if (*s_sim) name = "simulate", outs = cmd_simulate(ctx, simd, effective);
    else if (*s_pipe) name = "pipeline", outs = cmd_pipeline(ctx, pipe, effective);
    finish(ctx, name, effective, std::move(outs));
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_usage_error(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace planartrack::cli
