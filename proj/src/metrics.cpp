#include "lidarcmp/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "lidarcmp/kdtree.hpp"
#include "lidarcmp/perturb.hpp"
#include "lidarcmp/rng.hpp"

namespace lidarcmp::metrics {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_non_empty(const PointCloud& a, const PointCloud& b, const char* op) {
  if (a.empty() || b.empty()) {
    throw PreconditionError(std::string(op) + ": empty cloud");
  }
}

std::string trim_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Squared nearest-neighbor distance of every `from` point into `to`, in
/// point order; the fixed order keeps downstream sums deterministic.
std::vector<double> nn_dist_sq(const PointCloud& from, const SpatialIndex& to_index) {
  std::vector<double> d(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    d[i] = to_index.nearest(from.points[i]).dist_sq;
  }
  return d;
}

std::int64_t floor_div_cell(double coord, double cell) {
  return static_cast<std::int64_t>(std::floor(coord / cell));
}

struct CellId {
  std::int64_t x, y, z;
  bool operator==(const CellId&) const = default;
  bool operator<(const CellId& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

struct CellHash {
  std::size_t operator()(const CellId& c) const {
    std::uint64_t h = scramble64(static_cast<std::uint64_t>(c.x));
    h = mix_seed(h, static_cast<std::uint64_t>(c.y));
    h = mix_seed(h, static_cast<std::uint64_t>(c.z));
    return static_cast<std::size_t>(h);
  }
};

MetricResult finish(MetricSpec spec, double value, Clock::time_point t0,
                    nlohmann::json extra = nlohmann::json::object()) {
  MetricResult r;
  r.value = value;
  r.orientation = spec.orientation();
  r.wall_time_s = seconds_since(t0);
  r.spec = std::move(spec);
  r.extra = std::move(extra);
  return r;
}

}  // namespace

// --- spec plumbing ---------------------------------------------------------

MetricKind metric_kind_from_name(const std::string& name) {
  if (name == "chamfer") return MetricKind::chamfer;
  if (name == "dcd") return MetricKind::dcd;
  if (name == "emd") return MetricKind::emd;
  if (name == "histogram") return MetricKind::histogram;
  if (name == "icp") return MetricKind::icp;
  if (name == "voxel_iou") return MetricKind::voxel_iou;
  if (name == "bev") return MetricKind::bev;
  throw PreconditionError("unknown metric: " + name);
}

std::string metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::chamfer: return "chamfer";
    case MetricKind::dcd: return "dcd";
    case MetricKind::emd: return "emd";
    case MetricKind::histogram: return "histogram";
    case MetricKind::icp: return "icp";
    case MetricKind::voxel_iou: return "voxel_iou";
    case MetricKind::bev: return "bev";
  }
  return "?";
}

void IcpParams::validate() const {
  if (max_iterations <= 0 || convergence_tol <= 0 || max_correspondence_dist <= 0) {
    throw PreconditionError("icp parameters must be positive");
  }
}

void MetricSpec::validate() const {
  if (alpha <= 0) throw PreconditionError("dcd alpha must be > 0");
  if (bins < 2) throw PreconditionError("histogram bins must be >= 2");
  if (minkowski_order <= 0) throw PreconditionError("minkowski order must be > 0");
  if (voxel_size <= 0 || cell_size <= 0) throw PreconditionError("grid sizes must be > 0");
  if (sampling.mode == SamplingSpec::Mode::random && sampling.n < 2) {
    throw PreconditionError("histogram random sampling needs n >= 2");
  }
  if (sampling.cell <= 0) throw PreconditionError("sampling voxel cell must be > 0");
  if (pre_downsample && *pre_downsample <= 0) {
    throw PreconditionError("pre_downsample cell must be > 0");
  }
  icp.validate();
}

Orientation MetricSpec::orientation() const {
  return kind == MetricKind::voxel_iou ? Orientation::similarity : Orientation::distance;
}

std::string MetricSpec::name() const {
  switch (kind) {
    case MetricKind::chamfer:
      return pre_downsample ? "chamfer[vds=" + trim_number(*pre_downsample) + "]" : "chamfer";
    case MetricKind::dcd: {
      std::string n = "dcd[alpha=" + trim_number(alpha);
      if (pre_downsample) n += ",vds=" + trim_number(*pre_downsample);
      return n + "]";
    }
    case MetricKind::emd: return "emd";
    case MetricKind::histogram:
      return sampling.mode == SamplingSpec::Mode::random
                 ? "histogram[random,n=" + std::to_string(sampling.n) + "]"
                 : "histogram[voxel,cell=" + trim_number(sampling.cell) + "]";
    case MetricKind::icp: return "icp";
    case MetricKind::voxel_iou: return "voxel_iou[" + trim_number(voxel_size) + "]";
    case MetricKind::bev: return "bev[" + trim_number(cell_size) + "]";
  }
  return "?";
}

nlohmann::json MetricSpec::params_json() const {
  nlohmann::json p = nlohmann::json::object();
  switch (kind) {
    case MetricKind::chamfer: break;
    case MetricKind::dcd: p["alpha"] = alpha; break;
    case MetricKind::emd: p["size_cap"] = emd_cap; break;
    case MetricKind::histogram:
      p["bins"] = bins;
      p["minkowski_order"] = minkowski_order;
      if (sampling.mode == SamplingSpec::Mode::random) {
        p["sampling"] = "random";
        p["n"] = sampling.n;
        p["seed"] = sampling.seed;
      } else {
        p["sampling"] = "voxel";
        p["cell"] = sampling.cell;
      }
      break;
    case MetricKind::icp:
      p["max_iterations"] = icp.max_iterations;
      p["convergence_tol"] = icp.convergence_tol;
      p["max_correspondence_dist"] = icp.max_correspondence_dist;
      break;
    case MetricKind::voxel_iou: p["voxel_size"] = voxel_size; break;
    case MetricKind::bev: p["cell_size"] = cell_size; break;
  }
  if (pre_downsample) p["pre_downsample"] = *pre_downsample;
  return p;
}

MetricSpec MetricSpec::parse(const std::string& text) {
  MetricSpec spec;
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string::npos ? colon : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  spec.kind = metric_kind_from_name(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::size_t eq = parts[i].find('=');
    if (eq == std::string::npos) {
      throw PreconditionError("metric option '" + parts[i] + "' is not key=value");
    }
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "alpha") spec.alpha = std::stod(val);
    else if (key == "bins") spec.bins = std::stoi(val);
    else if (key == "order") spec.minkowski_order = std::stod(val);
    else if (key == "sampling") spec.sampling.mode = val == "voxel" ? SamplingSpec::Mode::voxel
                                                                    : SamplingSpec::Mode::random;
    else if (key == "n") spec.sampling.n = std::stoi(val);
    else if (key == "seed") spec.sampling.seed = std::stoull(val);
    else if (key == "cell") spec.sampling.cell = std::stod(val);
    else if (key == "voxel_size") spec.voxel_size = std::stod(val);
    else if (key == "cell_size") spec.cell_size = std::stod(val);
    else if (key == "vds" || key == "pre_downsample") spec.pre_downsample = std::stod(val);
    else if (key == "max_iterations") spec.icp.max_iterations = std::stoi(val);
    else if (key == "convergence_tol") spec.icp.convergence_tol = std::stod(val);
    else if (key == "max_correspondence_dist") spec.icp.max_correspondence_dist = std::stod(val);
    else if (key == "size_cap") spec.emd_cap = std::stoull(val);
    else throw PreconditionError("unknown metric option '" + key + "'");
  }
  spec.validate();
  return spec;
}

MetricSpec MetricSpec::from_json(const nlohmann::json& j) {
  MetricSpec spec;
  spec.kind = metric_kind_from_name(j.at("metric").get<std::string>());
  const nlohmann::json p = j.value("params", nlohmann::json::object());
  spec.alpha = p.value("alpha", spec.alpha);
  spec.bins = p.value("bins", spec.bins);
  spec.minkowski_order = p.value("minkowski_order", spec.minkowski_order);
  if (p.value("sampling", "random") == std::string("voxel")) {
    spec.sampling.mode = SamplingSpec::Mode::voxel;
  }
  spec.sampling.n = p.value("n", spec.sampling.n);
  spec.sampling.seed = p.value("seed", spec.sampling.seed);
  spec.sampling.cell = p.value("cell", spec.sampling.cell);
  spec.voxel_size = p.value("voxel_size", spec.voxel_size);
  spec.cell_size = p.value("cell_size", spec.cell_size);
  if (p.contains("pre_downsample")) spec.pre_downsample = p["pre_downsample"].get<double>();
  spec.icp.max_iterations = p.value("max_iterations", spec.icp.max_iterations);
  spec.icp.convergence_tol = p.value("convergence_tol", spec.icp.convergence_tol);
  spec.icp.max_correspondence_dist =
      p.value("max_correspondence_dist", spec.icp.max_correspondence_dist);
  spec.emd_cap = p.value("size_cap", spec.emd_cap);
  spec.validate();
  return spec;
}

nlohmann::json MetricResult::to_json() const {
  return nlohmann::json{{"metric", metric_kind_name(spec.kind)},
                        {"params", spec.params_json()},
                        {"value", value},
                        {"orientation", orientation == Orientation::distance ? "distance" : "similarity"},
                        {"wall_time_s", wall_time_s},
                        {"extra", extra}};
}

// --- chamfer / dcd ---------------------------------------------------------

MetricResult chamfer(const PointCloud& a, const PointCloud& b,
                     std::optional<double> pre_downsample) {
  const auto t0 = Clock::now();
  require_non_empty(a, b, "chamfer");
  PointCloud da, db;
  if (pre_downsample) {
    da = perturb::downsample_voxel(a, *pre_downsample);
    db = perturb::downsample_voxel(b, *pre_downsample);
  }
  const PointCloud& pa = pre_downsample ? da : a;
  const PointCloud& pb = pre_downsample ? db : b;

  const SpatialIndex ib(pb);
  const SpatialIndex ia(pa);
  const std::vector<double> ab = nn_dist_sq(pa, ib);
  const std::vector<double> ba = nn_dist_sq(pb, ia);
  const double term_a = std::accumulate(ab.begin(), ab.end(), 0.0) / static_cast<double>(pa.size());
  const double term_b = std::accumulate(ba.begin(), ba.end(), 0.0) / static_cast<double>(pb.size());

  MetricSpec spec;
  spec.kind = MetricKind::chamfer;
  spec.pre_downsample = pre_downsample;
  return finish(spec, term_a + term_b, t0);
}

MetricResult dcd(const PointCloud& a, const PointCloud& b, double alpha,
                 std::optional<double> pre_downsample) {
  const auto t0 = Clock::now();
  require_non_empty(a, b, "dcd");
  if (alpha <= 0) throw PreconditionError("dcd alpha must be > 0");
  PointCloud da, db;
  if (pre_downsample) {
    da = perturb::downsample_voxel(a, *pre_downsample);
    db = perturb::downsample_voxel(b, *pre_downsample);
  }
  const PointCloud& pa = pre_downsample ? da : a;
  const PointCloud& pb = pre_downsample ? db : b;

  const SpatialIndex ib(pb);
  const SpatialIndex ia(pa);

  // Query both directions first: the multiplicity n of a target point is the
  // number of opposing-cloud points that picked it as nearest neighbor.
  struct Side {
    std::vector<double> d;     // unsquared NN distance per query point
    std::vector<int> target;   // chosen target id per query point
  };
  auto sweep = [](const PointCloud& from, const SpatialIndex& to) {
    Side s;
    s.d.resize(from.size());
    s.target.resize(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
      const auto hit = to.nearest(from.points[i]);
      s.d[i] = hit.distance();
      s.target[i] = hit.index;
    }
    return s;
  };
  const Side ab = sweep(pa, ib);
  const Side ba = sweep(pb, ia);

  std::vector<int> hits_on_b(pb.size(), 0);
  for (const int t : ab.target) hits_on_b[static_cast<std::size_t>(t)] += 1;
  std::vector<int> hits_on_a(pa.size(), 0);
  for (const int t : ba.target) hits_on_a[static_cast<std::size_t>(t)] += 1;

  auto term = [alpha](const Side& side, const std::vector<int>& hits_on_target) {
    double sum = 0.0;
    for (std::size_t i = 0; i < side.d.size(); ++i) {
      const int n = std::max(1, hits_on_target[static_cast<std::size_t>(side.target[i])]);
      sum += 1.0 - std::exp(-alpha * side.d[i]) / static_cast<double>(n);
    }
    return sum / static_cast<double>(side.d.size());
  };

  const double value = 0.5 * (term(ab, hits_on_b) + term(ba, hits_on_a));
  MetricSpec spec;
  spec.kind = MetricKind::dcd;
  spec.alpha = alpha;
  spec.pre_downsample = pre_downsample;
  return finish(spec, value, t0);
}

// --- voxel IoU / BEV -------------------------------------------------------

MetricResult voxel_iou(const PointCloud& a, const PointCloud& b, double voxel_size) {
  const auto t0 = Clock::now();
  require_non_empty(a, b, "voxel_iou");
  if (voxel_size <= 0) throw PreconditionError("voxel_size must be > 0");

  auto occupied = [voxel_size](const PointCloud& c) {
    std::unordered_set<CellId, CellHash> cells;
    cells.reserve(c.size());
    for (const Vec3& p : c.points) {
      cells.insert({floor_div_cell(p.x, voxel_size), floor_div_cell(p.y, voxel_size),
                    floor_div_cell(p.z, voxel_size)});
    }
    return cells;
  };
  const auto va = occupied(a);
  const auto vb = occupied(b);
  std::size_t inter = 0;
  for (const CellId& c : va) inter += vb.count(c);
  const std::size_t uni = va.size() + vb.size() - inter;
  const double value = static_cast<double>(inter) / static_cast<double>(uni);

  MetricSpec spec;
  spec.kind = MetricKind::voxel_iou;
  spec.voxel_size = voxel_size;
  return finish(spec, value, t0,
                {{"intersection", inter}, {"union", uni}});
}

MetricResult bev_distance(const PointCloud& a, const PointCloud& b, double cell_size) {
  const auto t0 = Clock::now();
  require_non_empty(a, b, "bev");
  if (cell_size <= 0) throw PreconditionError("cell_size must be > 0");

  // Shared anchor: the union AABB minimum, so both clouds rasterize onto the
  // same grid.
  const Aabb ba_ = bounds(a);
  const Aabb bb_ = bounds(b);
  const double ox = std::min(ba_.min.x, bb_.min.x);
  const double oy = std::min(ba_.min.y, bb_.min.y);

  struct Cell2dHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& c) const {
      return static_cast<std::size_t>(
          mix_seed(scramble64(static_cast<std::uint64_t>(c.first)),
                   static_cast<std::uint64_t>(c.second)));
    }
  };
  using Grid = std::unordered_map<std::pair<std::int64_t, std::int64_t>, double, Cell2dHash>;
  auto rasterize = [&](const PointCloud& c) {
    Grid g;
    g.reserve(c.size());
    const double w = 1.0 / static_cast<double>(c.size());
    for (const Vec3& p : c.points) {
      g[{floor_div_cell(p.x - ox, cell_size), floor_div_cell(p.y - oy, cell_size)}] += w;
    }
    return g;
  };
  const Grid ga = rasterize(a);
  const Grid gb = rasterize(b);

  // Fixed summation order over the sorted key union keeps the result
  // independent of hash-map iteration order.
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  keys.reserve(ga.size() + gb.size());
  for (const auto& [k, _] : ga) keys.push_back(k);
  for (const auto& [k, _] : gb) {
    if (!ga.count(k)) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  double value = 0.0;
  for (const auto& k : keys) {
    const auto ita = ga.find(k);
    const auto itb = gb.find(k);
    const double fa = ita == ga.end() ? 0.0 : ita->second;
    const double fb = itb == gb.end() ? 0.0 : itb->second;
    value += std::abs(fa - fb);
  }

  MetricSpec spec;
  spec.kind = MetricKind::bev;
  spec.cell_size = cell_size;
  return finish(spec, value, t0);
}

// --- combined operations ---------------------------------------------------

nlohmann::json TwoStepResult::to_json() const {
  nlohmann::json j{{"dcd_alpha1", dcd_alpha1},
                   {"verdict", similar ? "similar" : "dissimilar"},
                   {"trigger", trigger}};
  j["chamfer"] = chamfer ? nlohmann::json(*chamfer) : nlohmann::json(nullptr);
  return j;
}

TwoStepResult two_step_compare(const PointCloud& a, const PointCloud& b, double trigger) {
  require_non_empty(a, b, "two_step_compare");
  TwoStepResult r;
  r.trigger = trigger;
  r.dcd_alpha1 = dcd(a, b, 1.0).value;
  r.similar = r.dcd_alpha1 <= trigger;
  if (!r.similar) r.chamfer = chamfer(a, b).value;
  return r;
}

TransferResult transfer_intensity(const PointCloud& sim, const PointCloud& real, double radius) {
  if (radius <= 0) throw PreconditionError("transfer_intensity: radius must be > 0");
  if (!real.has_intensity()) {
    throw PreconditionError("transfer_intensity: real cloud has no intensity");
  }
  if (sim.empty() || real.empty()) {
    throw PreconditionError("transfer_intensity: empty cloud");
  }
  TransferResult r;
  r.cloud = sim;
  if (!r.cloud.has_intensity()) r.cloud.intensity.assign(sim.size(), 0.0);
  const SpatialIndex index(real);
  for (std::size_t i = 0; i < sim.size(); ++i) {
    if (const auto hit = index.nearest_within(sim.points[i], radius)) {
      r.cloud.intensity[i] = real.intensity[static_cast<std::size_t>(hit->index)];
      r.matched += 1;
    }
  }
  r.matched_fraction = static_cast<double>(r.matched) / static_cast<double>(sim.size());
  return r;
}

MetricResult evaluate(const MetricSpec& spec, const PointCloud& a, const PointCloud& b) {
  spec.validate();
  switch (spec.kind) {
    case MetricKind::chamfer: return chamfer(a, b, spec.pre_downsample);
    case MetricKind::dcd: return dcd(a, b, spec.alpha, spec.pre_downsample);
    case MetricKind::emd: return emd(a, b, spec.emd_cap);
    case MetricKind::histogram:
      return histogram_distance(a, b, spec.sampling, spec.bins, spec.minkowski_order);
    case MetricKind::icp: return icp_rmse(a, b, spec.icp);
    case MetricKind::voxel_iou: return voxel_iou(a, b, spec.voxel_size);
    case MetricKind::bev: return bev_distance(a, b, spec.cell_size);
  }
  throw PreconditionError("unhandled metric kind");
}

}  // namespace lidarcmp::metrics
