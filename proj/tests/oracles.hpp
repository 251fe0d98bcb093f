#pragma once

// Test-only reference implementations. These deliberately avoid the library's
// spatial index and solvers so their answers come from an independent path.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lidarcmp/types.hpp"

namespace oracles {

using lidarcmp::PointCloud;
using lidarcmp::Vec3;

struct Nearest {
  int index = -1;
  double dist_sq = std::numeric_limits<double>::infinity();
};

/// Linear scan; ties resolve to the lowest id because the comparison is
/// strict.
inline Nearest brute_nearest(const std::vector<Vec3>& pts, const Vec3& q) {
  Nearest best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = lidarcmp::dist_sq(pts[i], q);
    if (d2 < best.dist_sq) {
      best.dist_sq = d2;
      best.index = static_cast<int>(i);
    }
  }
  return best;
}

/// Chamfer per the two-term mean-of-squared-NN form, O(n*m).
inline double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  double sum_a = 0.0;
  for (const Vec3& p : a.points) sum_a += brute_nearest(b.points, p).dist_sq;
  double sum_b = 0.0;
  for (const Vec3& p : b.points) sum_b += brute_nearest(a.points, p).dist_sq;
  return sum_a / static_cast<double>(a.size()) + sum_b / static_cast<double>(b.size());
}

/// Density-aware chamfer with brute-force neighbor search.
inline double brute_dcd(const PointCloud& a, const PointCloud& b, double alpha) {
  std::vector<int> target_ab(a.size()), target_ba(b.size());
  std::vector<double> d_ab(a.size()), d_ba(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Nearest n = brute_nearest(b.points, a.points[i]);
    target_ab[i] = n.index;
    d_ab[i] = std::sqrt(n.dist_sq);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Nearest n = brute_nearest(a.points, b.points[i]);
    target_ba[i] = n.index;
    d_ba[i] = std::sqrt(n.dist_sq);
  }
  std::vector<int> hits_b(b.size(), 0), hits_a(a.size(), 0);
  for (const int t : target_ab) hits_b[t] += 1;
  for (const int t : target_ba) hits_a[t] += 1;
  double term_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    term_a += 1.0 - std::exp(-alpha * d_ab[i]) / std::max(1, hits_b[target_ab[i]]);
  }
  double term_b = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    term_b += 1.0 - std::exp(-alpha * d_ba[i]) / std::max(1, hits_a[target_ba[i]]);
  }
  return 0.5 * (term_a / static_cast<double>(a.size()) + term_b / static_cast<double>(b.size()));
}

/// Exact EMD by enumerating all |a|! bijections; practical to ~8 points.
inline double brute_emd_total(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += lidarcmp::dist(a.points[i], b.points[perm[i]]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracles
