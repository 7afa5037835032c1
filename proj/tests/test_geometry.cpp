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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "planartrack/geometry.hpp"

namespace pt = planartrack;

using namespace fixture;

TEST(Homography, UnitSquareScaledByTwo) {
  const pt::CorrespondenceSet c = {{{0, 0}, {0, 0}}, {{1, 0}, {2, 0}}, {{1, 1}, {2, 2}}, {{0, 1}, {0, 2}}};
  const pt::Homography h = pt::estimate_homography(c);
  const double expected[3][3] = {{2, 0, 0}, {0, 2, 0}, {0, 0, 1}};
  for (int r = 0; r < 3; ++r)
    for (int q = 0; q < 3; ++q) EXPECT_NEAR(h.matrix()(r, q), expected[r][q], 1e-9);
  for (const auto& p : c) {
    const pt::Point2 m = pt::apply_homography(h, p.source);
    EXPECT_NEAR(m.x, p.target.x, 1e-9);
    EXPECT_NEAR(m.y, p.target.y, 1e-9);
  }
}

TEST(Homography, IdentityPairsGiveIdentity) {
  const pt::CorrespondenceSet c = {{{3, 1}, {3, 1}}, {{17, 2}, {17, 2}}, {{15, 21}, {15, 21}}, {{1, 13}, {1, 13}}};
  const Eigen::Matrix3d h = pt::estimate_homography(c).matrix();
  EXPECT_LT((h - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Homography, ExactGridRecovery) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const pt::Homography truth = random_homography(rng);
    const auto pairs = grid_pairs(truth);
    EXPECT_LT(pt::reprojection_rms(pt::estimate_homography(pairs), pairs), 1e-6);
  }
}

TEST(Homography, ApplyBasics) {
  const pt::Point2 p = pt::apply_homography(pt::Homography::identity(), {3.5, 7.25});
  EXPECT_DOUBLE_EQ(p.x, 3.5);
  EXPECT_DOUBLE_EQ(p.y, 7.25);
  const auto s = pt::Homography::from_rows({{{2, 0, 0}, {0, 2, 0}, {0, 0, 1}}});
  const pt::Point2 q = pt::apply_homography(s, {3, 4});
  EXPECT_DOUBLE_EQ(q.x, 6.0);
  EXPECT_DOUBLE_EQ(q.y, 8.0);
}

TEST(Homography, PointAtInfinity) {
  const auto h = pt::Homography::from_rows({{{1, 0, 0}, {0, 1, 0}, {1, 0, 0}}});
  try {
    pt::apply_homography(h, {0.0, 5.0});
    FAIL();
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::ErrorCode::PointAtInfinity);
  }
}

TEST(Homography, InverseRoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  for (int trial = 0; trial < 200; ++trial) {
    const pt::Homography h = random_homography(rng);
    const pt::Homography inv = pt::invert_homography(h);
    const Eigen::Matrix3d prod = h.matrix() * inv.matrix();
    const Eigen::Matrix3d normalized = prod / prod(2, 2);
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 3; ++q)
        if (r != q) EXPECT_LT(std::abs(normalized(r, q)), 1e-9);
    const pt::Point2 p{u(rng), u(rng)};
    const pt::Point2 back = pt::apply_homography(inv, pt::apply_homography(h, p));
    EXPECT_NEAR(back.x, p.x, 1e-9);
    EXPECT_NEAR(back.y, p.y, 1e-9);
  }
}

TEST(Homography, DiagonalInverse) {
  const auto inv = pt::invert_homography(pt::Homography::from_rows({{{2, 0, 0}, {0, 2, 0}, {0, 0, 1}}}));
  EXPECT_NEAR(inv.matrix()(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(inv.matrix()(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(inv.matrix()(2, 2), 1.0, 1e-15);
}

TEST(Homography, SingularInverseThrows) {
  const auto h = pt::Homography::from_rows({{{1, 2, 0}, {2, 4, 0}, {0, 0, 1}}});
  try {
    pt::invert_homography(h);
    FAIL();
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::ErrorCode::SingularMatrix);
  }
}

TEST(Homography, EstimationErrors) {
  const pt::CorrespondenceSet three = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  try {
    pt::estimate_homography(three);
    FAIL();
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::ErrorCode::TooFewPairs);
  }
  const pt::CorrespondenceSet collinear = {{{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, {{2, 2}, {2, 2}}, {{3, 3}, {3, 3}}};
  try {
    pt::estimate_homography(collinear);
    FAIL();
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::ErrorCode::DegenerateConfiguration);
  }
}

TEST(Homography, ReprojectionRms) {
  const pt::CorrespondenceSet exact = grid_pairs(pt::Homography::identity());
  EXPECT_DOUBLE_EQ(pt::reprojection_rms(pt::Homography::identity(), exact), 0.0);
  const pt::CorrespondenceSet one = {{{1, 1}, {4, 5}}};
  EXPECT_DOUBLE_EQ(pt::reprojection_rms(pt::Homography::identity(), one), 5.0);
}

TEST(Homography, NoisyGridRmsBand) {
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    auto pairs = grid_pairs(random_homography(rng));
    for (auto& p : pairs) p.target = p.target + pt::Point2{noise(rng), noise(rng)};
    const double rms = pt::reprojection_rms(pt::estimate_homography(pairs), pairs);
    EXPECT_GT(rms, 0.1) << "seed " << seed;
    EXPECT_LT(rms, 1.2) << "seed " << seed;
  }
}

TEST(Distortion, ZeroModelIsIdentity) {
  const pt::DistortionModel d = pt::DistortionModel::for_image(640, 480);
  const pt::Point2 p{123.25, 77.5};
  EXPECT_EQ(pt::distort_point(d, p).x, p.x);
  EXPECT_EQ(pt::undistort_point(d, p).y, p.y);
}

TEST(Distortion, CenterIsFixed) {
  pt::DistortionModel d{-0.3, 0.1, {100, 100}, 100};
  const pt::Point2 c = pt::distort_point(d, {100, 100});
  EXPECT_DOUBLE_EQ(c.x, 100.0);
  EXPECT_DOUBLE_EQ(c.y, 100.0);
  const pt::Point2 u = pt::undistort_point(d, {100, 100});
  EXPECT_DOUBLE_EQ(u.x, 100.0);
  EXPECT_DOUBLE_EQ(u.y, 100.0);
}

TEST(Distortion, RoundTrip) {
  pt::DistortionModel d{-0.1, 0.0, {100, 100}, 100};
  const pt::Point2 back = pt::undistort_point(d, pt::distort_point(d, {160, 130}));
  EXPECT_NEAR(back.x, 160.0, 1e-6);
  EXPECT_NEAR(back.y, 130.0, 1e-6);
  // Independent check of the forward map: r^2 = 0.36 + 0.09.
  const double f = 1.0 - 0.1 * 0.45;
  const pt::Point2 fwd = pt::distort_point(d, {160, 130});
  EXPECT_NEAR(fwd.x, 100 + 60 * f, 1e-12);
  EXPECT_NEAR(fwd.y, 100 + 30 * f, 1e-12);
}

TEST(Straightness, Collinear) {
  const std::vector<pt::Point2> pts = {{0, 0}, {1, 1}, {2, 2}};
  EXPECT_NEAR(pt::straightness_residual(pts), 0.0, 1e-12);
}

TEST(Straightness, TriangleMatchesLineSearch) {
  const std::vector<pt::Point2> pts = {{0, 0}, {1, 1}, {2, 0}};
  const double oracle = oracle::line_search_residual({{0, 0}, {1, 1}, {2, 0}});
  EXPECT_NEAR(oracle, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(pt::straightness_residual(pts), oracle, 1e-9);
}

TEST(Straightness, RotationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<pt::Point2> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({u(rng), 0.3 * u(rng)});
  const double base = pt::straightness_residual(pts);
  for (double a : {0.3, 1.1, 2.5}) {
    std::vector<pt::Point2> rot;
    for (auto p : pts) rot.push_back({std::cos(a) * p.x - std::sin(a) * p.y + 4, std::sin(a) * p.x + std::cos(a) * p.y - 2});
    EXPECT_NEAR(pt::straightness_residual(rot), base, 1e-9);
  }
}

TEST(Distortion, StraightLinesGiveZeroModel) {
  const pt::DistortionModel zero = pt::DistortionModel::for_image(640, 480);
  const auto fit = pt::estimate_distortion(distorted_lines(zero), zero.center, zero.scale);
  EXPECT_LT(std::abs(fit.model.k1), 1e-3);
  EXPECT_LT(std::abs(fit.model.k2), 1e-3);
  EXPECT_LT(fit.objective, 1e-9);
}

TEST(Distortion, RecoversBarrelCoefficient) {
  const pt::DistortionModel truth = pt::DistortionModel::for_image(640, 480, -0.15, 0.0);
  const auto fit = pt::estimate_distortion(distorted_lines(truth), truth.center, truth.scale);
  EXPECT_NEAR(fit.model.k1, -0.15, 0.015);
  EXPECT_LT(fit.objective, 1e-4 * fit.initial_objective);
  EXPECT_LE(fit.objective, fit.best_grid_objective);
}

TEST(Distortion, Errors) {
  const pt::DistortionModel zero = pt::DistortionModel::for_image(640, 480);
  auto lines = distorted_lines(zero);
  lines.resize(1);
  try {
    pt::estimate_distortion(lines, zero.center, zero.scale);
    FAIL();
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::ErrorCode::InsufficientLines);
  }
  // Lines through the distortion center stay straight under any radial model.
  std::vector<pt::Polyline> radial;
  for (double a : {0.2, 1.0, 2.0}) {
    pt::Polyline l{"r", {}};
    for (int i = -5; i <= 5; ++i) l.points.push_back(zero.center + pt::Point2{20.0 * i * std::cos(a), 20.0 * i * std::sin(a)});
    radial.push_back(l);
  }
  try {
    pt::estimate_distortion(radial, zero.center, zero.scale);
    FAIL();
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::ErrorCode::DegenerateGeometry);
  }
}
