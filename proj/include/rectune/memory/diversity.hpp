#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "rectune/core/error.hpp"

namespace rectune::mem {

using Points = std::vector<std::vector<double>>;

// Per-dimension standardization with the population standard deviation. A
// constant dimension maps to 0 everywhere.
inline Points zscore(const Points& pts) {
  if (pts.empty()) return {};
  const std::size_t dims = pts.front().size();
  const auto n = static_cast<double>(pts.size());
  Points z(pts.size(), std::vector<double>(dims, 0.0));
  for (std::size_t j = 0; j < dims; ++j) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p[j];
    mean /= n;
    double var = 0.0;
    for (const auto& p : pts) var += (p[j] - mean) * (p[j] - mean);
    const double sd = std::sqrt(var / n);
    if (sd == 0.0) continue;
    for (std::size_t i = 0; i < pts.size(); ++i) z[i][j] = (pts[i][j] - mean) / sd;
  }
  return z;
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

// Farthest-point greedy: starting from `seed`, repeatedly add the point whose
// distance to the nearest selected point is largest (ties: lowest index).
inline std::vector<std::size_t> greedy_maxmin(const Points& pts, std::size_t seed, std::size_t k) {
  if (pts.empty() || k == 0) return {};
  if (seed >= pts.size()) throw ValidationError("seed index out of range");
  k = std::min(k, pts.size());
  std::vector<std::size_t> chosen{seed};
  std::vector<bool> used(pts.size(), false);
  used[seed] = true;
  std::vector<double> nearest(pts.size(), std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const auto& last = pts[chosen.back()];
    std::size_t best = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (used[i]) continue;
      nearest[i] = std::min(nearest[i], squared_distance(pts[i], last));
      if (best == pts.size() || nearest[i] > nearest[best]) best = i;
    }
    used[best] = true;
    chosen.push_back(best);
  }
  return chosen;
}

// Diversity-maximizing subset of size min(k, n): z-score the metric vectors,
// seed with the highest-utility point (ties: lowest index), then greedy
// max-min selection.
inline std::vector<std::size_t> select_diverse(const Points& vectors, std::size_t k, const std::vector<double>& utilities) {
  if (vectors.empty()) return {};
  if (utilities.size() != vectors.size()) throw ValidationError("one utility per candidate required");
  if (k == 0) throw ValidationError("k must be >= 1");
  std::size_t seed = 0;
  for (std::size_t i = 1; i < utilities.size(); ++i)
    if (utilities[i] > utilities[seed]) seed = i;
  return greedy_maxmin(zscore(vectors), seed, k);
}

}  // namespace rectune::mem
