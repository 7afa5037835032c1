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
#include <stdexcept>
#include <string>
#include <string_view>

namespace planartrack {

enum class ErrorCode {
  // geometry
  TooFewPairs,
  DegenerateConfiguration,
  PointAtInfinity,
  SingularMatrix,
  NonConvergence,
  InsufficientLines,
  DegenerateGeometry,
  // mosaic
  EmptyFootprint,
  // ingest
  ParseError,
  IoError,
  RunSumMismatch,
  EmptyMask,
  EmptyRegion,
  // tracker
  NonFiniteMeasurement,
  NonMonotonicFrameIndex,
  // metrics
  DuplicateId,
  ZeroGroundTruth,
  NoMatches,
  EmptyEvaluation,
  // simulator
  InfeasiblePen,
  // configuration
  UnknownKey,
  TypeMismatch,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InsufficientLines: return "InsufficientLines";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::EmptyFootprint: return "EmptyFootprint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::RunSumMismatch: return "RunSumMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NonFiniteMeasurement: return "NonFiniteMeasurement";
    case ErrorCode::NonMonotonicFrameIndex: return "NonMonotonicFrameIndex";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ZeroGroundTruth: return "ZeroGroundTruth";
    case ErrorCode::NoMatches: return "NoMatches";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::InfeasiblePen: return "InfeasiblePen";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Input/format/usage failures as opposed to failures of the computation itself.
constexpr bool is_usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::UnknownKey:
    case ErrorCode::TypeMismatch:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Axis-aligned box in (left, top, width, height) form.
struct Box {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
  Point2 center() const { return {left + 0.5 * width, top + 0.5 * height}; }
  bool contains(Point2 p) const {
    return p.x >= left && p.x <= right() && p.y >= top && p.y <= bottom();
  }
  Box translated(Point2 d) const { return {left + d.x, top + d.y, width, height}; }

  static Box from_corners(double x0, double y0, double x1, double y1) {
    return {x0, y0, x1 - x0, y1 - y0};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

/// Continuous-coordinate IoU of two boxes. Both boxes must have positive area.
inline double box_iou(const Box& a, const Box& b) {
  if (!(a.area() > 0.0) || !(b.area() > 0.0)) {
    throw Error(ErrorCode::EmptyRegion, "box IoU needs boxes of positive area");
  }
  const double inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

}  // namespace planartrack
