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

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "planartrack/core.hpp"

namespace planartrack {

/// Planar projective map, stored with m(2,2) = 1 whenever that entry is non-zero.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m) : m_(m) { normalize(); }

  static Homography identity() { return Homography(); }
  static Homography from_rows(const std::array<std::array<double, 3>, 3>& rows) {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
    return Homography(m);
  }

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }
  double determinant() const { return m_.determinant(); }

  friend Homography operator*(const Homography& a, const Homography& b) {
    return Homography(a.m_ * b.m_);
  }

 private:
  void normalize() {
    const double w = m_(2, 2);
    if (w != 0.0) m_ /= w;
  }

  Eigen::Matrix3d m_;
};

struct Correspondence {
  Point2 source;
  Point2 target;
};

using CorrespondenceSet = std::vector<Correspondence>;

inline Point2 apply_homography(const Homography& h, Point2 p) {
  const Eigen::Matrix3d& m = h.matrix();
  const double u = m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2);
  const double v = m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2);
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (std::abs(w) < 1e-12) {
    throw Error(ErrorCode::PointAtInfinity, "point maps to the line at infinity");
  }
  return {u / w, v / w};
}

inline Homography invert_homography(const Homography& h) {
  const Eigen::Matrix3d& m = h.matrix();
  const double scale = m.cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!(scale > 0.0) || std::abs(det) < 1e-12 * scale * scale * scale) {
    throw Error(ErrorCode::SingularMatrix, "homography is not invertible");
  }
  return Homography(m.inverse());
}

namespace detail {

// Similarity that moves the centroid to the origin and sets the mean distance to sqrt(2).
inline Eigen::Matrix3d hartley_transform(std::span<const Point2> pts) {
  double cx = 0.0, cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

inline Point2 transform(const Eigen::Matrix3d& t, Point2 p) {
  return {t(0, 0) * p.x + t(0, 1) * p.y + t(0, 2), t(1, 0) * p.x + t(1, 1) * p.y + t(1, 2)};
}

}  // namespace detail

/// Normalized DLT. The homogeneous 2n x 9 system is solved through its smallest
/// right singular vector; a second near-zero singular value means the
/// correspondences do not pin down a unique homography.
inline Homography estimate_homography(const CorrespondenceSet& c) {
  if (c.size() < 4) {
    throw Error(ErrorCode::TooFewPairs,
                "need at least 4 correspondences, got " + std::to_string(c.size()));
  }
  std::vector<Point2> src, dst;
  src.reserve(c.size());
  dst.reserve(c.size());
  for (const auto& pair : c) {
    if (!is_finite(pair.source) || !is_finite(pair.target)) {
      throw Error(ErrorCode::DegenerateConfiguration, "non-finite correspondence");
    }
    src.push_back(pair.source);
    dst.push_back(pair.target);
  }
  const Eigen::Matrix3d ts = detail::hartley_transform(src);
  const Eigen::Matrix3d td = detail::hartley_transform(dst);

  const Eigen::Index rows = std::max<Eigen::Index>(9, 2 * static_cast<Eigen::Index>(c.size()));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point2 p = detail::transform(ts, src[i]);
    const Point2 q = detail::transform(td, dst[i]);
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -p.x, -p.y, -1, 0, 0, 0, q.x * p.x, q.x * p.y, q.x;
    a.row(r + 1) << 0, 0, 0, -p.x, -p.y, -1, q.y * p.x, q.y * p.y, q.y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(7) < 1e-9 * sv(0)) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "correspondence system is rank deficient (collinear or repeated points)");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d m = td.inverse() * hn * ts;
  if (std::abs(m(2, 2)) < 1e-15 * m.cwiseAbs().maxCoeff()) {
    throw Error(ErrorCode::DegenerateConfiguration, "estimated homography maps origin to infinity");
  }
  Homography result(m);
  if (std::abs(result.determinant()) < 1e-14 * std::pow(result.matrix().cwiseAbs().maxCoeff(), 3)) {
    throw Error(ErrorCode::DegenerateConfiguration, "estimated homography is singular");
  }
  return result;
}

inline double reprojection_rms(const Homography& h, const CorrespondenceSet& c) {
  if (c.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& pair : c) {
    const Point2 d = apply_homography(h, pair.source) - pair.target;
    sum += d.x * d.x + d.y * d.y;
  }
  return std::sqrt(sum / static_cast<double>(c.size()));
}

// ---------------------------------------------------------------------------
// Radial distortion

/// Two-coefficient radial model acting on x_n = (p - center) / scale:
/// r_d = r_u (1 + k1 r_u^2 + k2 r_u^4).
struct DistortionModel {
  double k1 = 0.0;
  double k2 = 0.0;
  Point2 center{};
  double scale = 1.0;

  static DistortionModel for_image(int width, int height, double k1 = 0.0, double k2 = 0.0) {
    return {k1, k2, {0.5 * width, 0.5 * height}, 0.5 * std::hypot(width, height)};
  }

  bool is_zero() const { return k1 == 0.0 && k2 == 0.0; }

  double radial_factor(double r) const {
    const double r2 = r * r;
    return 1.0 + k1 * r2 + k2 * r2 * r2;
  }

  /// d r_d / d r_u
  double radial_slope(double r) const {
    const double r2 = r * r;
    return 1.0 + 3.0 * k1 * r2 + 5.0 * k2 * r2 * r2;
  }

  /// True when r (1 + k1 r^2 + k2 r^4) is strictly increasing on [0, r_max] (normalized units).
  bool is_monotone(double r_max, int samples = 1000) const {
    for (int i = 0; i <= samples; ++i) {
      if (radial_slope(r_max * i / samples) <= 0.0) return false;
    }
    return true;
  }
};

inline Point2 distort_point(const DistortionModel& d, Point2 p) {
  if (d.is_zero()) return p;
  const Point2 n = (1.0 / d.scale) * (p - d.center);
  const double f = d.radial_factor(norm(n));
  return d.center + (d.scale * f) * n;
}

inline Point2 undistort_point(const DistortionModel& d, Point2 p) {
  if (d.is_zero()) return p;
  const Point2 n = (1.0 / d.scale) * (p - d.center);
  const double rd = norm(n);
  if (rd == 0.0) return p;
  double r = rd;
  bool converged = false;
  for (int it = 0; it < 20; ++it) {
    const double slope = d.radial_slope(r);
    if (!(slope > 0.0)) break;
    const double step = (r * d.radial_factor(r) - rd) / slope;
    r -= step;
    if (std::abs(step) < 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(r) || r < 0.0) {
    throw Error(ErrorCode::NonConvergence, "radial inversion failed; model is not monotone here");
  }
  return d.center + (d.scale * r / rd) * n;
}

struct Polyline {
  std::string label;
  std::vector<Point2> points;
};

namespace detail {

struct LineFit {
  Point2 centroid;
  Point2 normal;  // unit
  double residual = 0.0;
};

inline LineFit fit_line(std::span<const Point2> pts) {
  LineFit fit;
  for (const auto& p : pts) fit.centroid = fit.centroid + p;
  fit.centroid = (1.0 / static_cast<double>(pts.size())) * fit.centroid;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    const Point2 d = p - fit.centroid;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    sxy += d.x * d.y;
  }
  Eigen::Matrix2d scatter;
  scatter << sxx, sxy, sxy, syy;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  fit.residual = std::max(0.0, eig.eigenvalues()(0));
  fit.normal = {eig.eigenvectors()(0, 0), eig.eigenvectors()(1, 0)};
  return fit;
}

}  // namespace detail

/// Sum of squared perpendicular distances to the total-least-squares line.
inline double straightness_residual(std::span<const Point2> pts) {
  if (pts.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "polyline needs at least 3 points");
  }
  return detail::fit_line(pts).residual;
}

inline double straightness_residual(const Polyline& poly) { return straightness_residual(poly.points); }

struct DistortionFit {
  DistortionModel model;
  double initial_objective = 0.0;  // objective of the zero model
  double objective = 0.0;          // objective at the returned model
  double best_grid_objective = 0.0;
  int iterations = 0;
};

/// Total straightness residual of all lines after undistortion; +inf when the
/// model cannot be inverted at some point.
inline double distortion_objective(const std::vector<Polyline>& lines, const DistortionModel& d) {
  double total = 0.0;
  std::vector<Point2> buf;
  for (const auto& line : lines) {
    buf.clear();
    for (const auto& p : line.points) {
      try {
        buf.push_back(undistort_point(d, p));
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    }
    total += straightness_residual(buf);
  }
  return total;
}

namespace detail {

template <typename F>
std::pair<Eigen::Vector2d, int> nelder_mead(F&& f, Eigen::Vector2d start, Eigen::Vector2d step,
                                            double tol, int max_iter = 5000) {
  std::array<Eigen::Vector2d, 3> x{start, start + Eigen::Vector2d(step(0), 0.0),
                                   start + Eigen::Vector2d(0.0, step(1))};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  int it = 0;
  for (; it < max_iter; ++it) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = order[0], mid = order[1], worst = order[2];
    const double diameter =
        std::max({(x[0] - x[1]).norm(), (x[0] - x[2]).norm(), (x[1] - x[2]).norm()});
    if (diameter < tol) break;

    const Eigen::Vector2d centroid = 0.5 * (x[best] + x[mid]);
    const Eigen::Vector2d xr = centroid + (centroid - x[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const Eigen::Vector2d xe = centroid + 2.0 * (centroid - x[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
    } else if (fr < fx[mid]) {
      x[worst] = xr;
      fx[worst] = fr;
    } else {
      const bool outside = fr < fx[worst];
      const Eigen::Vector2d xc =
          outside ? Eigen::Vector2d(centroid + 0.5 * (xr - centroid))
                  : Eigen::Vector2d(centroid + 0.5 * (x[worst] - centroid));
      const double fc = f(xc);
      if (fc < (outside ? fr : fx[worst])) {
        x[worst] = xc;
        fx[worst] = fc;
      } else {
        for (int i : {mid, worst}) {
          x[i] = x[best] + 0.5 * (x[i] - x[best]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (fx[i] < fx[best]) best = i;
  return {x[best], it};
}

}  // namespace detail

/// Fits (k1, k2) so that the given polylines become as straight as possible.
/// A 21 x 21 grid over k1 in [-0.5, 0.5], k2 in [-0.2, 0.2] seeds a Nelder-Mead
/// refinement; the result is never worse than any grid point.
inline DistortionFit estimate_distortion(const std::vector<Polyline>& lines, Point2 center,
                                         double scale) {
  if (lines.size() < 2) {
    throw Error(ErrorCode::InsufficientLines, "need at least 2 polylines");
  }
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  bool any_off_center = false;
  for (const auto& line : lines) {
    if (line.points.size() < 3) {
      throw Error(ErrorCode::InvalidArgument, "polyline '" + line.label + "' has fewer than 3 points");
    }
    // A line through the center stays on its radial ray under any radial model.
    double max_offset = 0.0;
    for (const auto& p : line.points) {
      const Point2 a = line.points.front() - center;
      const Point2 b = p - center;
      const double len = norm(b);
      if (len > 0.0) max_offset = std::max(max_offset, std::abs(a.x * b.y - a.y * b.x) / len);
    }
    if (max_offset > 1e-6 * scale) any_off_center = true;
  }
  if (!any_off_center) {
    throw Error(ErrorCode::DegenerateGeometry, "all lines are radial through the center");
  }

  DistortionModel model{0.0, 0.0, center, scale};
  auto objective = [&](double k1, double k2) {
    DistortionModel m = model;
    m.k1 = k1;
    m.k2 = k2;
    return distortion_objective(lines, m);
  };

  DistortionFit fit;
  fit.initial_objective = objective(0.0, 0.0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_k(0.0, 0.0);
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double k1 = -0.5 + 0.05 * i;
      const double k2 = -0.2 + 0.02 * j;
      const double v = objective(k1, k2);
      if (v < best) {
        best = v;
        best_k = {k1, k2};
      }
    }
  }
  fit.best_grid_objective = best;

  auto f = [&](const Eigen::Vector2d& k) { return objective(k(0), k(1)); };
  auto [k, iterations] = detail::nelder_mead(f, best_k, Eigen::Vector2d(0.025, 0.01), 1e-6);
  double refined = f(k);
  if (!(refined <= best)) {
    k = best_k;
    refined = best;
  }
  model.k1 = k(0);
  model.k2 = k(1);
  fit.model = model;
  fit.objective = refined;
  fit.iterations = iterations;
  return fit;
}

}  // namespace planartrack
