#pragma once

#include <optional>
#include <vector>

#include "lidarcmp/types.hpp"

namespace lidarcmp {

/// Exact nearest-neighbor index over one cloud's points (median-split
/// kd-tree). Answers are identical to a brute-force scan, including the tie
/// rule: equal distances resolve to the lowest point id. Immutable after
/// construction and safe to share across threads.
class SpatialIndex {
 public:
  struct Hit {
    int index = -1;
    double dist_sq = 0.0;
    double distance() const { return std::sqrt(dist_sq); }
  };

  /// Throws PreconditionError on an empty cloud, ValidationError on
  /// non-finite coordinates.
  explicit SpatialIndex(const PointCloud& cloud);

  std::size_t size() const { return pts_.size(); }
  const Vec3& point(int id) const { return pts_[static_cast<std::size_t>(id)]; }

  /// Exact minimizer of Euclidean distance; ties go to the lowest id.
  Hit nearest(const Vec3& q) const;

  /// Nearest point iff its distance <= radius (closed ball), else empty.
  std::optional<Hit> nearest_within(const Vec3& q, double radius) const;

  /// All points with distance <= radius, sorted by (distance, id).
  std::vector<Hit> radius_search(const Vec3& q, double radius) const;

 private:
  struct Node {
    int point = -1;  // id of the splitting point
    int left = -1;
    int right = -1;
    int axis = 0;
  };

  int build(int* ids, int count, int depth);
  void search(int node, const Vec3& q, Hit& best) const;
  void search_radius(int node, const Vec3& q, double r_sq, std::vector<Hit>& out) const;

  std::vector<Vec3> pts_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace lidarcmp
