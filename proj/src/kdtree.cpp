#include "lidarcmp/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace lidarcmp {

SpatialIndex::SpatialIndex(const PointCloud& cloud) : pts_(cloud.points) {
  if (cloud.empty()) throw PreconditionError("SpatialIndex: empty cloud");
  cloud.validate();
  std::vector<int> ids(pts_.size());
  std::iota(ids.begin(), ids.end(), 0);
  nodes_.reserve(pts_.size());
  root_ = build(ids.data(), static_cast<int>(ids.size()), 0);
}

int SpatialIndex::build(int* ids, int count, int depth) {
  if (count <= 0) return -1;
  const int axis = depth % 3;
  const int mid = count / 2;
  std::nth_element(ids, ids + mid, ids + count, [&](int a, int b) {
    return pts_[static_cast<std::size_t>(a)][axis] < pts_[static_cast<std::size_t>(b)][axis];
  });
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{ids[mid], -1, -1, axis});
  const int left = build(ids, mid, depth + 1);
  const int right = build(ids + mid + 1, count - mid - 1, depth + 1);
  nodes_[static_cast<std::size_t>(node_id)].left = left;
  nodes_[static_cast<std::size_t>(node_id)].right = right;
  return node_id;
}

void SpatialIndex::search(int node, const Vec3& q, Hit& best) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const Vec3& p = pts_[static_cast<std::size_t>(n.point)];
  const double d2 = dist_sq(q, p);
  if (d2 < best.dist_sq || (d2 == best.dist_sq && n.point < best.index)) {
    best.index = n.point;
    best.dist_sq = d2;
  }
  const double plane = q[n.axis] - p[n.axis];
  const int near = plane < 0.0 ? n.left : n.right;
  const int far = plane < 0.0 ? n.right : n.left;
  search(near, q, best);
  // <= keeps equal-distance candidates reachable so the lowest-id tie rule
  // matches brute force exactly.
  if (plane * plane <= best.dist_sq) search(far, q, best);
}

SpatialIndex::Hit SpatialIndex::nearest(const Vec3& q) const {
  Hit best;
  best.index = -1;
  best.dist_sq = std::numeric_limits<double>::infinity();
  search(root_, q, best);
  return best;
}

std::optional<SpatialIndex::Hit> SpatialIndex::nearest_within(const Vec3& q, double radius) const {
  if (radius <= 0.0) throw PreconditionError("nearest_within: radius must be positive");
  const Hit best = nearest(q);
  if (best.dist_sq <= radius * radius) return best;
  return std::nullopt;
}

void SpatialIndex::search_radius(int node, const Vec3& q, double r_sq, std::vector<Hit>& out) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const Vec3& p = pts_[static_cast<std::size_t>(n.point)];
  const double d2 = dist_sq(q, p);
  if (d2 <= r_sq) out.push_back(Hit{n.point, d2});
  const double plane = q[n.axis] - p[n.axis];
  if (plane < 0.0 || plane * plane <= r_sq) search_radius(n.left, q, r_sq, out);
  if (plane >= 0.0 || plane * plane <= r_sq) search_radius(n.right, q, r_sq, out);
}

std::vector<SpatialIndex::Hit> SpatialIndex::radius_search(const Vec3& q, double radius) const {
  if (radius <= 0.0) throw PreconditionError("radius_search: radius must be positive");
  std::vector<Hit> out;
  search_radius(root_, q, radius * radius, out);
  std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& b) {
    return a.dist_sq != b.dist_sq ? a.dist_sq < b.dist_sq : a.index < b.index;
  });
  return out;
}

}  // namespace lidarcmp
