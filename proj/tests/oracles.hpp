/**
 * Copyright 2026 The hplus Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hplus/core.hpp"

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. Written independently of src/ and deliberately naive.

#ifndef HPLUS_TESTS_ORACLES_HPP_
#define HPLUS_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double dist2(const Vec &a, const Vec &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline Vec median(const std::vector<Vec> &v) {
  Vec out(v[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec col;
    for (const auto &x : v) col.push_back(x[i]);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    out[i] = n % 2 ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
  }
  return out;
}

// Score of every candidate: sum of squared distances to its M - f - 2
// nearest other vectors.
inline std::vector<double> krum_scores(const std::vector<Vec> &v, std::size_t f) {
  const std::size_t m = v.size();
  std::vector<double> scores(m);
  for (std::size_t i = 0; i < m; ++i) {
    Vec d;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) d.push_back(dist2(v[i], v[j]));
    std::sort(d.begin(), d.end());
    double s = 0.0;
    for (std::size_t k = 0; k < m - f - 2; ++k) s += d[k];
    scores[i] = s;
  }
  return scores;
}

inline std::size_t krum_pick(const std::vector<Vec> &v, std::size_t f) {
  const auto s = krum_scores(v, f);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] < s[best]) best = i;
  return best;
}

inline double gm_objective(const std::vector<double> &w, const std::vector<Vec> &v, const Vec &c) {
  double s = 0.0;
  for (std::size_t m = 0; m < v.size(); ++m) s += w[m] * std::sqrt(dist2(v[m], c));
  return s;
}

// Dense 2-D grid search of the geometric median objective: a coarse pass over
// the bounding box, then a `resolution` grid around the coarse winner. The
// objective is convex, so the refinement window cannot miss the minimum.
inline std::pair<Vec, double> gm_grid_2d(const std::vector<double> &w, const std::vector<Vec> &v,
                                         double resolution) {
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  for (const auto &x : v)
    for (int k = 0; k < 2; ++k) {
      lo[k] = std::min(lo[k], x[k]);
      hi[k] = std::max(hi[k], x[k]);
    }
  const double coarse = 50 * resolution;
  Vec best{lo[0], lo[1]};
  double best_f = gm_objective(w, v, best);
  for (double a = lo[0]; a <= hi[0] + coarse; a += coarse)
    for (double b = lo[1]; b <= hi[1] + coarse; b += coarse) {
      const double f = gm_objective(w, v, {a, b});
      if (f < best_f) best_f = f, best = {a, b};
    }
  const Vec centre = best;
  for (int i = -100; i <= 100; ++i)
    for (int j = -100; j <= 100; ++j) {
      const Vec c{centre[0] + i * resolution, centre[1] + j * resolution};
      const double f = gm_objective(w, v, c);
      if (f < best_f) best_f = f, best = c;
    }
  return {best, best_f};
}

inline double h(const Vec &x, const Vec &y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double num = std::abs(x[i]);
    const double den = std::abs(y[i] - x[i]) + std::abs(x[i]);
    s += den == 0.0 ? 1.0 : num / den;
  }
  return s / static_cast<double>(x.size());
}

// Column sums written as an explicit row-by-row spreadsheet accumulation.
inline Vec column_sum(const std::vector<Vec> &rows) {
  Vec s(rows[0].size(), 0.0);
  for (const auto &r : rows)
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += r[i];
  return s;
}

inline Vec signflip(const std::vector<Vec> &honest) {
  Vec s = column_sum(honest);
  for (auto &x : s) x = -3.0 * x;
  return s;
}

inline Vec lie(const std::vector<Vec> &honest, double c) {
  const double n = static_cast<double>(honest.size());
  Vec mean = column_sum(honest);
  for (auto &x : mean) x /= n;
  Vec out(mean.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double ss = 0.0;
    for (const auto &r : honest) ss += (r[i] - mean[i]) * (r[i] - mean[i]);
    out[i] = mean[i] + c * std::sqrt(ss / n);
  }
  return out;
}

inline Vec foe(const std::vector<Vec> &honest, double q, std::size_t m, std::size_t b) {
  Vec s = column_sum(honest);
  for (auto &x : s) x = q / static_cast<double>(m - b) * x;
  return s;
}

inline Vec ours(const std::vector<Vec> &honest, std::size_t m, std::size_t b) {
  Vec s = column_sum(honest);
  for (auto &x : s) x = -(1.0 / static_cast<double>(m - b)) * x;
  return s;
}

}  // namespace oracle

#endif  // HPLUS_TESTS_ORACLES_HPP_
