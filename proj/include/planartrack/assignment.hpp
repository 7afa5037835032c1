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
#include <limits>
#include <vector>

#include "planartrack/core.hpp"

namespace planartrack {

/// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Match {
  std::size_t row = 0;
  std::size_t col = 0;
  double cost = 0.0;
};

struct Assignment {
  std::vector<Match> matches;  // ascending row order
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost() const {
    double s = 0.0;
    for (const auto& m : matches) s += m.cost;
    return s;
  }
};

/// Shortest-augmenting-path Hungarian method with row/column potentials.
/// Requires a square matrix; returns col_of_row. O(n^3).
inline std::vector<std::size_t> solve_square_assignment(const CostMatrix& c) {
  const std::size_t n = c.rows();
  if (c.cols() != n) throw Error(ErrorCode::InvalidArgument, "square matrix required");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[row_of_col[j] - 1] = j - 1;
  return col_of_row;
}

/// Gated linear assignment. The matrix is padded to square with `cutoff`
/// dummies and real entries are capped at `cutoff`, so the solver minimizes
/// sum over accepted pairs of (cost - cutoff); pairs costing more than the
/// cutoff are then reported as unmatched.
inline Assignment hungarian_assign(const CostMatrix& c, double cutoff) {
  Assignment out;
  const std::size_t n = std::max(c.rows(), c.cols());
  if (n == 0) return out;
  CostMatrix sq(n, n, cutoff);
  for (std::size_t r = 0; r < c.rows(); ++r)
    for (std::size_t k = 0; k < c.cols(); ++k) {
      const double v = c(r, k);
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "cost matrix entries must be finite");
      sq(r, k) = std::min(v, cutoff);
    }
  const auto col_of_row = solve_square_assignment(sq);
  std::vector<bool> col_used(c.cols(), false);
  for (std::size_t r = 0; r < c.rows(); ++r) {
    const std::size_t k = col_of_row[r];
    if (k < c.cols() && c(r, k) <= cutoff) {
      out.matches.push_back({r, k, c(r, k)});
      col_used[k] = true;
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t k = 0; k < c.cols(); ++k)
    if (!col_used[k]) out.unmatched_cols.push_back(k);
  return out;
}

}  // namespace planartrack
