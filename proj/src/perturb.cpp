#include "lidarcmp/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lidarcmp/rng.hpp"

namespace lidarcmp::perturb {

void PerturbationSpec::validate() const {
  if (std_dev < 0) throw PreconditionError("noise std must be >= 0");
  if (count < 0) throw PreconditionError("outlier count must be >= 0");
  if (n_clusters < 0) throw PreconditionError("cluster count must be >= 0");
  if (max_points_per_cluster < 1) throw PreconditionError("max_points_per_cluster must be >= 1");
  if (max_radius <= 0) throw PreconditionError("max_radius must be > 0");
  if (max_center_dist <= 0) throw PreconditionError("max_center_dist must be > 0");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("fraction must be in (0, 1]");
  if (cell <= 0) throw PreconditionError("voxel cell must be > 0");
  if (kind == Kind::transform && transform.det() == 0.0) {
    throw PreconditionError("transform linear part is singular");
  }
}

std::string PerturbationSpec::kind_name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::noise: return "noise";
    case Kind::random_outliers: return "random_outliers";
    case Kind::clustered_outliers: return "clustered_outliers";
    case Kind::downsample_random: return "downsample_random";
    case Kind::downsample_voxel: return "downsample_voxel";
    case Kind::transform: return "transform";
  }
  return "?";
}

PerturbationSpec::Kind PerturbationSpec::kind_from_name(const std::string& name) {
  if (name == "identity") return Kind::identity;
  if (name == "noise") return Kind::noise;
  if (name == "random_outliers") return Kind::random_outliers;
  if (name == "clustered_outliers") return Kind::clustered_outliers;
  if (name == "downsample_random") return Kind::downsample_random;
  if (name == "downsample_voxel") return Kind::downsample_voxel;
  if (name == "transform") return Kind::transform;
  throw PreconditionError("unknown perturbation kind: " + name);
}

nlohmann::json PerturbationSpec::to_json() const {
  nlohmann::json j{{"kind", kind_name()}, {"seed", seed}};
  switch (kind) {
    case Kind::identity: break;
    case Kind::noise: j["std"] = std_dev; break;
    case Kind::random_outliers: j["count"] = count; break;
    case Kind::clustered_outliers:
      j["n_clusters"] = n_clusters;
      j["max_points_per_cluster"] = max_points_per_cluster;
      j["max_radius"] = max_radius;
      j["max_center_dist"] = max_center_dist;
      break;
    case Kind::downsample_random: j["fraction"] = fraction; break;
    case Kind::downsample_voxel: j["cell"] = cell; break;
    case Kind::transform: {
      j["linear"] = transform.linear;
      j["translation"] = {transform.translation.x, transform.translation.y,
                          transform.translation.z};
      break;
    }
  }
  return j;
}

PerturbationSpec PerturbationSpec::from_json(const nlohmann::json& j) {
  PerturbationSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.std_dev = j.value("std", 0.0);
  spec.count = j.value("count", 0L);
  spec.n_clusters = j.value("n_clusters", 0L);
  spec.max_points_per_cluster = j.value("max_points_per_cluster", 1000L);
  spec.max_radius = j.value("max_radius", 1.0);
  spec.max_center_dist = j.value("max_center_dist", 20.0);
  spec.fraction = j.value("fraction", 1.0);
  spec.cell = j.value("cell", 1.0);
  if (j.contains("linear")) {
    spec.transform.linear = j.at("linear").get<std::array<std::array<double, 3>, 3>>();
    const auto t = j.at("translation").get<std::array<double, 3>>();
    spec.transform.translation = {t[0], t[1], t[2]};
  }
  spec.validate();
  return spec;
}

PointCloud apply(const PointCloud& cloud, const PerturbationSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case PerturbationSpec::Kind::identity: return cloud;
    case PerturbationSpec::Kind::noise: return add_noise(cloud, spec.std_dev, spec.seed);
    case PerturbationSpec::Kind::random_outliers:
      return add_random_outliers(cloud, spec.count, spec.seed);
    case PerturbationSpec::Kind::clustered_outliers:
      return add_clustered_outliers(cloud, spec.n_clusters, spec.max_points_per_cluster,
                                    spec.max_radius, spec.max_center_dist, spec.seed);
    case PerturbationSpec::Kind::downsample_random:
      return downsample_random(cloud, spec.fraction, spec.seed);
    case PerturbationSpec::Kind::downsample_voxel: return downsample_voxel(cloud, spec.cell);
    case PerturbationSpec::Kind::transform: return apply_transform(cloud, spec.transform);
  }
  throw PreconditionError("unhandled perturbation kind");
}

PointCloud add_noise(const PointCloud& cloud, double std_dev, std::uint64_t seed) {
  if (std_dev < 0) throw PreconditionError("noise std must be >= 0");
  PointCloud out = cloud;
  if (std_dev == 0.0) return out;
  SplitMix64 rng(seed);
  for (Vec3& p : out.points) {
    p.x += std_dev * rng.gaussian();
    p.y += std_dev * rng.gaussian();
    p.z += std_dev * rng.gaussian();
  }
  return out;
}

PointCloud add_random_outliers(const PointCloud& cloud, long count, std::uint64_t seed) {
  if (cloud.empty()) throw PreconditionError("add_random_outliers: empty cloud");
  if (count < 0) throw PreconditionError("outlier count must be >= 0");
  PointCloud out = cloud;
  if (count == 0) return out;
  const Aabb box = bounds(cloud);
  SplitMix64 rng(seed);
  out.points.reserve(out.points.size() + static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    out.points.push_back({rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y),
                          rng.uniform(box.min.z, box.max.z)});
    if (out.has_intensity()) out.intensity.push_back(0.0);
  }
  return out;
}

PointCloud add_clustered_outliers(const PointCloud& cloud, long n_clusters,
                                  long max_points_per_cluster, double max_radius,
                                  double max_center_dist, std::uint64_t seed) {
  if (cloud.empty()) throw PreconditionError("add_clustered_outliers: empty cloud");
  if (n_clusters < 0) throw PreconditionError("cluster count must be >= 0");
  if (max_points_per_cluster < 1 || max_radius <= 0 || max_center_dist <= 0) {
    throw PreconditionError("cluster parameters must be positive");
  }
  PointCloud out = cloud;
  if (n_clusters == 0) return out;
  const Vec3 center = centroid(cloud);
  SplitMix64 rng(seed);
  for (long c = 0; c < n_clusters; ++c) {
    const Vec3 cluster_center = center + rng.in_unit_ball() * max_center_dist;
    const long size = 1 + static_cast<long>(rng.uniform() * static_cast<double>(max_points_per_cluster));
    const double radius = max_radius * (1.0 - rng.uniform());  // (0, max]
    for (long i = 0; i < size; ++i) {
      out.points.push_back(cluster_center + rng.in_unit_ball() * radius);
      if (out.has_intensity()) out.intensity.push_back(0.0);
    }
  }
  return out;
}

PointCloud downsample_random(const PointCloud& cloud, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("fraction must be in (0, 1]");
  const std::size_t n = cloud.size();
  const std::size_t keep =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (keep == 0) {
    throw PreconditionError("downsample_random: fraction " + std::to_string(fraction) +
                            " of " + std::to_string(n) + " points keeps nothing");
  }
  if (keep >= n) return cloud;

  // Partial Fisher-Yates over the id array, then ascending sort of the
  // selection to preserve the input order.
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(keep);
  std::sort(ids.begin(), ids.end());

  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.pose = cloud.pose;
  out.points.reserve(keep);
  if (cloud.has_intensity()) out.intensity.reserve(keep);
  for (const std::size_t id : ids) {
    out.points.push_back(cloud.points[id]);
    if (cloud.has_intensity()) out.intensity.push_back(cloud.intensity[id]);
  }
  return out;
}

namespace {

struct VoxelId {
  std::int64_t x, y, z;
  bool operator==(const VoxelId&) const = default;
};

struct VoxelHash {
  std::size_t operator()(const VoxelId& v) const {
    std::uint64_t h = scramble64(static_cast<std::uint64_t>(v.x));
    h = mix_seed(h, static_cast<std::uint64_t>(v.y));
    h = mix_seed(h, static_cast<std::uint64_t>(v.z));
    return static_cast<std::size_t>(h);
  }
};

VoxelId voxel_of(const Vec3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x / cell)),
          static_cast<std::int64_t>(std::floor(p.y / cell)),
          static_cast<std::int64_t>(std::floor(p.z / cell))};
}

}  // namespace

PointCloud downsample_voxel(const PointCloud& cloud, double cell) {
  if (cell <= 0) throw PreconditionError("voxel cell must be > 0");
  struct Acc {
    Vec3 sum{0, 0, 0};
    double intensity_sum = 0;
    std::size_t count = 0;
  };
  std::unordered_map<VoxelId, std::size_t, VoxelHash> slot;
  std::vector<Acc> acc;
  slot.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const VoxelId v = voxel_of(cloud.points[i], cell);
    auto [it, inserted] = slot.try_emplace(v, acc.size());
    if (inserted) acc.emplace_back();
    Acc& a = acc[it->second];
    a.sum += cloud.points[i];
    if (cloud.has_intensity()) a.intensity_sum += cloud.intensity[i];
    a.count += 1;
  }
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.pose = cloud.pose;
  out.points.reserve(acc.size());
  if (cloud.has_intensity()) out.intensity.reserve(acc.size());
  for (const Acc& a : acc) {
    out.points.push_back(a.sum / static_cast<double>(a.count));
    if (cloud.has_intensity()) out.intensity.push_back(a.intensity_sum / static_cast<double>(a.count));
  }
  return out;
}

PointCloud apply_transform(const PointCloud& cloud, const Affine& t) {
  if (t.det() == 0.0) throw PreconditionError("transform linear part is singular");
  PointCloud out = cloud;
  for (Vec3& p : out.points) p = t.apply(p);
  return out;
}

}  // namespace lidarcmp::perturb
