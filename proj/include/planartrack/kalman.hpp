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

#include "planartrack/core.hpp"

namespace planartrack {

struct KalmanNoise {
  double process = 1e-2;                 // per-axis acceleration variance
  double measurement = 1.0;              // centroid variance, px^2
  double initial_velocity_variance = 100.0;
};

/// Constant-velocity state [x, y, vx, vy] with dt = 1 frame.
struct KalmanState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();

  Point2 position() const { return {mean(0), mean(1)}; }
  Point2 velocity() const { return {mean(2), mean(3)}; }
};

inline KalmanState kf_init(Point2 centroid, const KalmanNoise& noise) {
  KalmanState s;
  s.mean << centroid.x, centroid.y, 0.0, 0.0;
  s.covariance = Eigen::Vector4d(noise.measurement, noise.measurement, noise.initial_velocity_variance,
                                 noise.initial_velocity_variance)
                     .asDiagonal();
  return s;
}

inline KalmanState kf_init(const Box& bbox, const KalmanNoise& noise) { return kf_init(bbox.center(), noise); }

inline const Eigen::Matrix4d& cv_transition() {
  static const Eigen::Matrix4d f = [] {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 2) = 1.0;
    m(1, 3) = 1.0;
    return m;
  }();
  return f;
}

/// Discrete white-acceleration process noise for dt = 1.
inline Eigen::Matrix4d cv_process_noise(double q) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = m(1, 1) = 0.25;
  m(0, 2) = m(2, 0) = m(1, 3) = m(3, 1) = 0.5;
  m(2, 2) = m(3, 3) = 1.0;
  return q * m;
}

inline KalmanState kf_predict(const KalmanState& s, const KalmanNoise& noise) {
  const Eigen::Matrix4d& f = cv_transition();
  KalmanState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose() + cv_process_noise(noise.process);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

inline KalmanState kf_update(const KalmanState& s, Point2 z, const KalmanNoise& noise) {
  if (!is_finite(z)) throw Error(ErrorCode::NonFiniteMeasurement, "measurement is not finite");
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = h(1, 1) = 1.0;
  const Eigen::Matrix2d innovation_cov = h * s.covariance * h.transpose() + noise.measurement * Eigen::Matrix2d::Identity();
  const Eigen::Matrix<double, 4, 2> gain = s.covariance * h.transpose() * innovation_cov.inverse();
  const Eigen::Vector2d residual(z.x - s.mean(0), z.y - s.mean(1));
  KalmanState out;
  out.mean = s.mean + gain * residual;
  // Joseph form.
  const Eigen::Matrix4d i_kh = Eigen::Matrix4d::Identity() - gain * h;
  out.covariance = i_kh * s.covariance * i_kh.transpose() + noise.measurement * gain * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

}  // namespace planartrack
